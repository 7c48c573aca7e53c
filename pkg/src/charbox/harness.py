"""Burgess amplification trace: shift identity, Holder chain, moment bounds.

Every inequality that the amplification argument uses pointwise is computed
here with explicit constants and checked on the spot; the trace record keeps
all intermediate quantities so failures are diagnosable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .boxes import Box, scaled_box
from .characters import Character, box_char_sum, _fsum_complex
from .energy import tau_profile

R_CAP = 30
INTERVAL_CAP = 10_000
MOMENT_BUDGET = 2**28


class RegimeError(ValueError):
    """Inputs outside the regime an operation is specified for."""


@dataclass(frozen=True)
class Parameters:
    r: int
    delta: float
    interval: range | None

    @property
    def interval_len(self) -> int:
        return len(self.interval) if self.interval is not None else 0


def choose_parameters(eps: float, p: int | None = None) -> Parameters:
    """r = nearest integer to 3/eps, delta = 3/(2r), I = [1, p^delta]."""
    if not 0 < eps < 0.5:
        raise RegimeError(f"eps must lie in (0, 1/2), got {eps}")
    r = int(round(3.0 / eps))
    delta = 3.0 / (2 * r)
    interval = range(1, int(p**delta) + 1) if p is not None else None
    return Parameters(r, delta, interval)


def delta_bracket_ok(eps: float, delta: float) -> bool:
    """(6/13) eps <= delta <= (6/11) eps, the bound the rounding guarantees."""
    return (6 / 13) * eps <= delta <= (6 / 11) * eps + 1e-15


# ---------------------------------------------------------------------------
# bad-tuple census (exact combinatorics)


def bad_tuple_count(alphabet: int, r: int) -> int:
    """Number of (z_1..z_{2r}) over an alphabet where no value occurs exactly
    once, i.e. every used value occurs at least twice.

    Exact: sum_k C(alphabet, k) * L! [x^L] (e^x - 1 - x)^k with L = 2r.
    """
    length = 2 * r
    base = [Fraction(0), Fraction(0)] + [
        Fraction(1, math.factorial(j)) for j in range(2, length + 1)
    ]
    total = 0
    poly = [Fraction(1)] + [Fraction(0)] * length  # (e^x - 1 - x)^0
    for k in range(1, length // 2 + 1):
        nxt = [Fraction(0)] * (length + 1)
        for i, c in enumerate(poly):
            if c:
                for j in range(2, length + 1 - i):
                    nxt[i + j] += c * base[j]
        poly = nxt
        surj = poly[length] * math.factorial(length)
        assert surj.denominator == 1
        total += math.comb(alphabet, k) * int(surj)
    return total


def bad_tuple_count_bruteforce(alphabet: int, r: int) -> int:
    """Exhaustive oracle over alphabet^(2r) tuples; tiny inputs only."""
    from collections import Counter
    from itertools import product

    count = 0
    for tup in product(range(alphabet), repeat=2 * r):
        if all(v >= 2 for v in Counter(tup).values()):
            count += 1
    return count


@dataclass(frozen=True)
class MomentResult:
    value: float
    bound: float
    good_count: int
    bad_count: int
    bad_bound: int
    within_bound: bool
    census_ok: bool


_MOMENT_CHUNK = 1 << 18


def moment_sum(chi: Character, interval: range, r: int, budget: int = MOMENT_BUDGET) -> MomentResult:
    """sum over u in F_q of |sum over z in I of chi(u+z)|^(2r), streamed over
    u in fixed-size chunks (memory independent of q), against the explicit
    bound 2 r q^(1/2) |I|^(2r) + q |I|^r r^(2r)."""
    ctx = chi.ctx
    size = len(interval)
    if size < 1:
        raise RegimeError("interval must be nonempty")
    if ctx.q * size > budget:
        raise RegimeError(f"q*|I| = {ctx.q * size} exceeds moment budget {budget}")
    partials = []
    for start in range(0, ctx.q, _MOMENT_CHUNK):
        chunk_u = np.arange(start, min(start + _MOMENT_CHUNK, ctx.q), dtype=np.int64)
        inner = np.zeros(len(chunk_u), dtype=np.complex128)
        for z in interval:
            inner += chi.values_at(ctx.add_int_array(chunk_u, z))
        partials.append(math.fsum(np.abs(inner) ** (2 * r)))
    value = math.fsum(partials)
    bound = 2 * r * math.sqrt(ctx.q) * float(size) ** (2 * r) + ctx.q * float(size) ** r * float(
        r
    ) ** (2 * r)
    bad = bad_tuple_count(size, r)
    good = size ** (2 * r) - bad
    return MomentResult(
        value,
        bound,
        good,
        bad,
        size**r * r ** (2 * r),
        value <= bound + 1e-3,
        bad <= size**r * r ** (2 * r),
    )


# ---------------------------------------------------------------------------
# the amplification trace


@dataclass(frozen=True, eq=False)
class BurgessTrace:
    box: Box
    chi_index: int
    eps: float
    r: int
    delta: float
    interval_len: int
    b_size: int
    b0_size: int
    true_sum: complex
    averaged_sum: complex
    shift_identity_error: float
    shift_identity_bound: float
    max_sym_diff: int
    sym_diff_bound: float
    sum_tau: int
    sum_tau_sq: int
    moment: MomentResult
    triple_abs: float
    holder_rhs: float
    assembled_bound: float
    tau_sq_log_ratio: float  # sum tau^2 / (|B| |B0| log^3 p)
    checks: dict[str, bool]

    @property
    def ok(self) -> bool:
        return all(self.checks.values())


def burgess_trace(box: Box, chi: Character, eps: float,
                  moment_budget: int = MOMENT_BUDGET) -> BurgessTrace:
    """Run the full shift-and-average amplification on one box and character,
    checking every explicit inequality along the way."""
    ctx = box.ctx
    p = ctx.p
    if chi.is_trivial:
        raise RegimeError("chi must be nontrivial")
    if any(h >= math.sqrt(p / 2) for h in box.H):
        raise RegimeError("trace requires all edges below sqrt(p/2)")
    params = choose_parameters(eps, p)
    if params.r > R_CAP:
        raise RegimeError(f"r = {params.r} exceeds cap {R_CAP}; raise eps")
    if params.interval_len > INTERVAL_CAP:
        raise RegimeError(f"|I| = {params.interval_len} exceeds cap {INTERVAL_CAP}")
    r, delta, interval = params.r, params.delta, params.interval

    b0 = scaled_box(box, delta)
    idx_b = box.element_indices()
    idx_sorted = np.sort(idx_b)
    b_size = box.size
    shift_bound = 6 * p ** (-delta) * b_size

    true_sum = box_char_sum(chi, box)

    # every (y, z) shift: symmetric difference count and the shifted sum
    max_sym = 0
    partial_sums = []
    for y_idx in b0.element_indices():
        y = ctx.decode(int(y_idx))
        for z in interval:
            c = ctx.mul(y, ctx.from_int(z))
            shifted = ctx.add_elem_array(idx_b, c)
            overlap = len(np.intersect1d(idx_sorted, shifted, assume_unique=False))
            sym = 2 * (b_size - overlap)
            max_sym = max(max_sym, sym)
            partial_sums.append(_fsum_complex(chi.values_at(shifted)))
    triple_total = complex(
        math.fsum(v.real for v in partial_sums), math.fsum(v.imag for v in partial_sums)
    )
    b0_size = b0.size
    averaged = triple_total / (b0_size * len(interval))
    identity_err = abs(true_sum - averaged)

    tau = tau_profile(box, b0)
    moment = moment_sum(chi, interval, r, budget=moment_budget)

    a1, a2, a3 = tau.sum_tau, tau.sum_tau_sq, moment.value
    holder_rhs = a1 ** (1 - 1 / r) * a2 ** (1 / (2 * r)) * a3 ** (1 / (2 * r)) + b_size * len(interval)
    triple_abs = abs(triple_total)
    assembled = holder_rhs / (b0_size * len(interval)) + shift_bound
    log3 = math.log(p) ** 3

    checks = {
        "sym_diff_bound": max_sym <= shift_bound,
        "shift_identity": identity_err <= shift_bound + 1e-6,
        "tau_total": tau.checks["total_pairs"],
        "tau_zero": tau.checks["tau_zero_bound"],
        "cauchy_schwarz": tau.checks["cauchy_schwarz"],
        "holder_chain": triple_abs <= holder_rhs + 1e-6,
        "moment_bound": moment.within_bound,
        "bad_census": moment.census_ok,
        "assembled_dominates": abs(true_sum) <= assembled + 1e-6,
    }
    return BurgessTrace(
        box=box,
        chi_index=chi.k,
        eps=eps,
        r=r,
        delta=delta,
        interval_len=len(interval),
        b_size=b_size,
        b0_size=b0_size,
        true_sum=true_sum,
        averaged_sum=averaged,
        shift_identity_error=identity_err,
        shift_identity_bound=shift_bound,
        max_sym_diff=max_sym,
        sym_diff_bound=shift_bound,
        sum_tau=a1,
        sum_tau_sq=a2,
        moment=moment,
        triple_abs=triple_abs,
        holder_rhs=holder_rhs,
        assembled_bound=assembled,
        tau_sq_log_ratio=a2 / (b_size * b0_size * log3),
        checks=checks,
    )
