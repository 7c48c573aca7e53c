"""Multiplicative energy, solution counts and ratio statistics of boxes.

Counts are exact integers throughout. Kernels run on dlog arrays: products
become dlog sums and ratios become dlog differences, so histograms over
pairs reduce to vectorized bincounts. The only floating point here is never
used; inequality checks compare squared integers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

from .boxes import Box, difference_box
from .field import FieldCtx, FqElem

PAIR_BUDGET = 2**28
_CHUNK = 1 << 21  # pairwise kernel chunk size (elements of the lhs slice)


class EnergyBudgetError(RuntimeError):
    pass


def _as_indices(ctx: FieldCtx, elements: Iterable[FqElem] | Box | np.ndarray) -> np.ndarray:
    if isinstance(elements, Box):
        idx = elements.element_indices()
    elif isinstance(elements, np.ndarray):
        idx = elements.astype(np.int64)
    else:
        idx = np.array([ctx.encode(e) for e in elements], dtype=np.int64)
    return np.unique(idx)


def _pair_bincount(ctx: FieldCtx, left_dlogs: np.ndarray, right_dlogs: np.ndarray, sign: int) -> np.ndarray:
    """Histogram over dlog(a) + sign*dlog(b) mod q-1 for all pairs (a, b)."""
    counts = np.zeros(ctx.q1, dtype=np.int64)
    step = max(1, _CHUNK // max(1, len(right_dlogs)))
    for start in range(0, len(left_dlogs), step):
        chunk = left_dlogs[start : start + step, None] + sign * right_dlogs[None, :]
        counts += np.bincount(chunk.ravel() % ctx.q1, minlength=ctx.q1)
    return counts


@dataclass(frozen=True, eq=False)
class EnergyProfile:
    """E(B) with the product histogram r(m) = #{(x, y) in B^2 : xy = m}."""

    ctx: FieldCtx
    E: int
    size: int
    r_zero: int
    _nonzero_counts: np.ndarray  # indexed by dlog of the product

    def r(self, m: FqElem) -> int:
        if not any(m):
            return self.r_zero
        return int(self._nonzero_counts[self.ctx.dlog_of(m)])

    @property
    def product_histogram(self) -> dict[FqElem, int]:
        out: dict[FqElem, int] = {}
        if self.r_zero:
            out[self.ctx.zero()] = self.r_zero
        for d in np.nonzero(self._nonzero_counts)[0]:
            out[self.ctx.decode(int(self.ctx.exp[d]))] = int(self._nonzero_counts[d])
        return out

    @property
    def total_pairs(self) -> int:
        return self.r_zero + int(self._nonzero_counts.sum())


def energy(ctx: FieldCtx, elements: Iterable[FqElem] | Box | np.ndarray,
           pair_budget: int = PAIR_BUDGET) -> EnergyProfile:
    """E(B) = #{(x, y, w, t) in B^4 : xy = wt} via the product histogram."""
    idx = _as_indices(ctx, elements)
    m = len(idx)
    if m * m > pair_budget:
        raise EnergyBudgetError(f"{m}^2 products exceed pair budget {pair_budget}")
    zeros = int((idx == 0).sum())
    dlogs = ctx.dlog[idx[idx != 0]]
    counts = _pair_bincount(ctx, dlogs, dlogs, +1)
    r_zero = 2 * zeros * m - zeros * zeros  # pairs with x = 0 or y = 0
    e = int((counts * counts).sum()) + r_zero * r_zero
    return EnergyProfile(ctx, e, m, r_zero, counts)


def energy_bruteforce(ctx: FieldCtx, elements: Iterable[FqElem]) -> int:
    """Quadruple-definition oracle, O(|B|^3); for tiny sets only."""
    elems = list(elements)
    count = 0
    for x in elems:
        for y in elems:
            xy = ctx.mul(x, y)
            for w in elems:
                for t in elems:
                    if ctx.mul(w, t) == xy:
                        count += 1
    return count


def f_count(ctx: FieldCtx, elements: Iterable[FqElem] | Box | np.ndarray, z: FqElem) -> int:
    """#{(x, y) in S^2 : xz = y}, exact."""
    idx = _as_indices(ctx, elements)
    member = np.zeros(ctx.q, dtype=bool)
    member[idx] = True
    has_zero = bool(member[0])
    if not any(z):
        return int(member[0]) * len(idx)  # x*0 = y forces y = 0
    dz = ctx.dlog_of(z)
    nz = idx[idx != 0]
    images = ctx.exp[(ctx.dlog[nz] + dz) % ctx.q1]
    return int(member[images].sum()) + (1 if has_zero else 0)


def ratio_set(ctx: FieldCtx, elements: Iterable[FqElem] | Box | np.ndarray) -> set[FqElem]:
    """Z' = {y x^{-1} : x, y in S minus 0}."""
    idx = _as_indices(ctx, elements)
    nz = idx[idx != 0]
    if len(nz) == 0:
        return set()
    dlogs = ctx.dlog[nz]
    diffs = np.unique((dlogs[None, :] - dlogs[:, None]).ravel() % ctx.q1)
    return {ctx.decode(int(ctx.exp[d])) for d in diffs}


# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class RatioProfile:
    """The S = S1 + S2 decomposition data for a box and its difference box.

    f0 values are 1 + (ratio histogram) on F_q^*; f values likewise from the
    box itself. All sums and inequality checks are exact integers.
    """

    box: Box
    E: int
    S: int
    S1: int
    S2: int
    sum_f_sq_over_zprime: int
    z_count: int
    zprime_count: int
    f_table: dict[int, int]  # z in F_p^* (as int) -> f_0(z)
    hypothesis_ok: bool  # all H_i < sqrt(p/2)
    checks: dict[str, bool]
    _h0: np.ndarray = field(repr=False, default=None)
    _hB: np.ndarray = field(repr=False, default=None)

    @property
    def Z(self) -> set[FqElem]:
        ctx = self.box.ctx
        return {ctx.decode(int(ctx.exp[d])) for d in np.nonzero(self._h0)[0]}

    @property
    def Zprime(self) -> set[FqElem]:
        ctx = self.box.ctx
        return {ctx.decode(int(ctx.exp[d])) for d in np.nonzero(self._hB)[0]}

    def f0_of(self, z: FqElem) -> int:
        if not any(z):
            raise ValueError("f_0 is defined on F_q^*")
        return 1 + int(self._h0[self.box.ctx.dlog_of(z)])

    def f_of(self, z: FqElem) -> int:
        if not any(z):
            raise ValueError("f is tabulated on F_q^* only")
        zero_in_b = 1 if self.checks["zero_in_B"] else 0
        return zero_in_b + int(self._hB[self.box.ctx.dlog_of(z)])


def one_dim_f_counts(p: int, h: int, z_values: np.ndarray) -> np.ndarray:
    """f_i(z) = #{(x, y) in [-h, h]^2 : xz = y mod p} for each z; needs 2h < p."""
    xs = np.arange(-h, h + 1, dtype=np.int64)
    residues = (z_values[:, None] * xs[None, :]) % p
    hits = (residues <= h) | (residues >= p - h)
    return hits.sum(axis=1)


def s_decomposition(box: Box, pair_budget: int = PAIR_BUDGET) -> RatioProfile:
    """Compute Z, f_0, S, S1, S2 for the difference box of B, check the
    energy chain and the prime-subfield factorization of f_0."""
    ctx = box.ctx
    p = ctx.p
    hypothesis_ok = all(h < math.sqrt(p / 2) for h in box.H)
    b0 = difference_box(box)

    idx_b = np.unique(box.element_indices())
    idx_b0 = np.unique(b0.element_indices())
    if len(idx_b0) ** 2 > pair_budget:
        raise EnergyBudgetError("difference box pair count exceeds budget")
    zero_in_b = bool((idx_b == 0).any())

    d_b = ctx.dlog[idx_b[idx_b != 0]]
    d_b0 = ctx.dlog[idx_b0[idx_b0 != 0]]
    h_b = _pair_bincount(ctx, d_b, d_b, -1)  # ratio histogram y/x over B
    h_0 = _pair_bincount(ctx, d_b0, d_b0, -1)

    e_b = energy(ctx, idx_b, pair_budget=pair_budget).E
    size = len(idx_b)

    in_z = h_0 > 0
    f0_vals = 1 + h_0
    s_total = int((f0_vals[in_z] ** 2).sum())

    subfield_dlogs = np.arange(0, ctx.q1, ctx.q1 // (p - 1), dtype=np.int64)
    prime_mask = np.zeros(ctx.q1, dtype=bool)
    prime_mask[subfield_dlogs] = True
    s1 = int((f0_vals[in_z & ~prime_mask] ** 2).sum())
    s2 = int((f0_vals[prime_mask] ** 2).sum())

    zb = 1 if zero_in_b else 0
    in_zprime = h_b > 0
    f_vals = zb + h_b
    sum_f_sq = int((f_vals[in_zprime] ** 2).sum())

    # f_0(z) = f_1(z) f_2(z) f_3(z) on the prime subfield
    z_ints = np.arange(1, p, dtype=np.int64)
    product = np.ones(p - 1, dtype=np.int64)
    for h in box.H:
        product *= one_dim_f_counts(p, h, z_ints)
    f0_prime = np.array(
        [1 + int(h_0[ctx.dlog_of(ctx.from_int(int(z)))]) for z in z_ints], dtype=np.int64
    )
    factorization_ok = bool((product == f0_prime).all())

    checks = {
        "zero_in_B": zero_in_b,
        "chain_2_1": e_b <= 2 * size**2 + sum_f_sq,
        "chain_3sq": e_b <= 3 * size**2 + s_total,
        "f_le_f0": bool((f_vals[in_zprime] <= f0_vals[in_zprime]).all()),
        "s_le_s1_plus_s2": s_total <= s1 + s2,
        "f0_factorizes_on_prime_subfield": factorization_ok,
        "f0_at_least_one": bool((f0_vals >= 1).all()),
    }
    f_table = {int(z): int(v) for z, v in zip(z_ints, f0_prime)}
    return RatioProfile(
        box, e_b, s_total, s1, s2, sum_f_sq, int(in_z.sum()), int(in_zprime.sum()),
        f_table, hypothesis_ok, checks, h_0, h_b,
    )


# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class TauProfile:
    """tau(u) = #{(x, y) in B x (B0 minus 0) : x y^{-1} = u} statistics."""

    sum_tau: int
    sum_tau_sq: int
    tau_zero: int
    b_size: int
    b0_size: int
    checks: dict[str, bool]
    _cross: np.ndarray = field(repr=False, default=None)

    def tau_of(self, ctx: FieldCtx, u: FqElem) -> int:
        if not any(u):
            return self.tau_zero
        return int(self._cross[ctx.dlog_of(u)])


def tau_profile(box: Box, box0: Box, pair_budget: int = PAIR_BUDGET) -> TauProfile:
    """Cross-ratio statistics between B and B0 plus the exact checks:
    sum tau = |B| (|B0| - 1), tau(0) <= |B0|, and the Cauchy-Schwarz bound
    (sum_{u != 0} tau^2)^2 <= E(B) E(B0) compared in integers."""
    ctx = box.ctx
    idx_b = np.unique(box.element_indices())
    idx_b0 = np.unique(box0.element_indices())
    if len(idx_b) * len(idx_b0) > pair_budget:
        raise EnergyBudgetError("cross pair count exceeds budget")
    zero_in_b = bool((idx_b == 0).any())
    nz_b = idx_b[idx_b != 0]
    nz_b0 = idx_b0[idx_b0 != 0]

    cross = _pair_bincount(ctx, ctx.dlog[nz_b], ctx.dlog[nz_b0], -1)
    tau_zero = (1 if zero_in_b else 0) * len(nz_b0)
    sum_tau = int(cross.sum()) + tau_zero
    sum_tau_sq_nonzero = int((cross * cross).sum())
    sum_tau_sq = sum_tau_sq_nonzero + tau_zero * tau_zero

    e_b = energy(ctx, idx_b, pair_budget=pair_budget).E
    e_b0 = energy(ctx, idx_b0, pair_budget=pair_budget).E
    checks = {
        "total_pairs": sum_tau == len(idx_b) * (len(idx_b0) - 1),
        "tau_zero_bound": tau_zero <= len(idx_b0),
        "cauchy_schwarz": sum_tau_sq_nonzero**2 <= e_b * e_b0,
    }
    return TauProfile(sum_tau, sum_tau_sq, tau_zero, len(idx_b), len(idx_b0), checks, cross)
