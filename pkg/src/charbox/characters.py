"""Multiplicative characters of F_{p^n} and the character sums under study.

chi_k sends g^m to exp(2 pi i k m / (q-1)) and 0 to 0. Box sums enumerate
in lexicographic coordinate order and accumulate with math.fsum so summation
is deterministic and compensated.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .boxes import Box
from .field import FieldCtx, FqElem, is_generating

_TABLE_CACHE_LIMIT = 2**22  # full chi tables only for q below this


@dataclass(frozen=True, eq=False)
class Character:
    ctx: FieldCtx
    k: int

    def __post_init__(self):
        object.__setattr__(self, "k", int(self.k) % self.ctx.q1)

    @property
    def order(self) -> int:
        """Least d with chi^d trivial: (q-1)/gcd(q-1, k)."""
        return self.ctx.q1 // math.gcd(self.ctx.q1, self.k)

    @property
    def is_trivial(self) -> bool:
        return self.k == 0

    def is_trivial_on_prime_subfield(self) -> bool:
        # F_p^* is generated by g^((q-1)/(p-1)); chi there is exp(2 pi i k/(p-1))
        return self.k % (self.ctx.p - 1) == 0

    def value(self, a: FqElem) -> complex:
        if not any(a):
            return 0j
        m = self.ctx.dlog_of(a)
        return _unit(self.k * m % self.ctx.q1, self.ctx.q1)

    def values_at(self, idx: np.ndarray) -> np.ndarray:
        """chi at encoded elements; chi(0) = 0."""
        table = self._table()
        if table is not None:
            return table[idx]
        dlogs = self.ctx.dlog[idx]
        vals = np.exp((2j * np.pi / self.ctx.q1) * (self.k * dlogs % self.ctx.q1))
        vals[dlogs < 0] = 0
        return vals

    def _table(self) -> np.ndarray | None:
        if self.ctx.q > _TABLE_CACHE_LIMIT:
            return None
        cached = getattr(self, "_table_cache", None)
        if cached is None:
            dlogs = self.ctx.dlog
            cached = np.exp((2j * np.pi / self.ctx.q1) * (self.k * dlogs % self.ctx.q1))
            cached[0] = 0
            cached.setflags(write=False)
            object.__setattr__(self, "_table_cache", cached)
        return cached


def _unit(num: int, den: int) -> complex:
    return complex(math.cos(2 * math.pi * num / den), math.sin(2 * math.pi * num / den))


def _fsum_complex(vals: np.ndarray) -> complex:
    return complex(math.fsum(vals.real), math.fsum(vals.imag))


def box_char_sum(chi: Character, box: Box) -> complex:
    """sum over x in B of chi(x), lexicographic order, compensated."""
    return _fsum_complex(chi.values_at(box.element_indices()))


@dataclass(frozen=True)
class PolyCharSum:
    value: complex
    m: int
    weil_bound: float
    degenerate: bool


def complete_poly_char_sum(chi: Character, roots: list[tuple[FqElem, int]]) -> PolyCharSum:
    """sum over u in F_q of chi(prod_i (u + z_i)^{e_i}).

    The z_i must be distinct and the e_i positive. When every exponent is
    divisible by the character order the value is flagged degenerate and the
    Weil bound does not apply.
    """
    ctx = chi.ctx
    if len({ctx.encode(z) for z, _ in roots}) != len(roots):
        raise ValueError("roots must be distinct")
    if any(e < 1 for _, e in roots):
        raise ValueError("exponents must be positive")
    m = len(roots)
    degenerate = all(e % chi.order == 0 for _, e in roots)

    all_u = np.arange(ctx.q, dtype=np.int64)
    acc = np.zeros(ctx.q, dtype=np.int64)
    zero_mask = np.zeros(ctx.q, dtype=bool)
    for z, e in roots:
        shifted = ctx.add_elem_array(all_u, z)
        dl = ctx.dlog[shifted]
        zero_mask |= dl < 0
        acc = (acc + e * np.where(dl < 0, 0, dl)) % ctx.q1
    vals = np.exp((2j * np.pi / ctx.q1) * (chi.k * acc % ctx.q1))
    vals[zero_mask] = 0
    value = _fsum_complex(vals)
    return PolyCharSum(value, m, (m - 1) * math.sqrt(ctx.q), degenerate)


def generator_interval_sum(
    chi: Character, a: FqElem, interval: range
) -> tuple[complex, float]:
    """sum over t in the interval of chi(a + t), plus |sum|/(sqrt(p) log p)."""
    ctx = chi.ctx
    if not is_generating(ctx, a):
        raise ValueError("a must generate F_{p^n} over F_p")
    if chi.is_trivial:
        raise ValueError("chi must be nontrivial")
    if len(interval) == 0:
        return 0j, 0.0
    base = ctx.encode(a)
    d0 = base % ctx.p
    ts = np.fromiter(interval, dtype=np.int64)
    idx = base - d0 + (d0 + ts % ctx.p) % ctx.p
    value = _fsum_complex(chi.values_at(idx))
    return value, abs(value) / (math.sqrt(ctx.p) * math.log(ctx.p))


def interval_sums_scan(chi: Character, a: FqElem) -> np.ndarray:
    """|sum over t in [lo, hi] of chi(a + t)| for all 1 <= lo <= hi <= p.

    Returns the flattened magnitudes; used by the generator-shift and
    Polya-Vinogradov pilot scans via prefix sums.
    """
    ctx = chi.ctx
    base = ctx.encode(a)
    d0 = base % ctx.p
    ts = np.arange(1, ctx.p + 1, dtype=np.int64)
    idx = base - d0 + (d0 + ts % ctx.p) % ctx.p
    vals = chi.values_at(idx)
    prefix = np.concatenate([[0j], np.cumsum(vals)])
    diff = prefix[None, 1:] - prefix[:-1, None]  # diff[i, j] = sum over [i+1, j+1]
    lo_idx, hi_idx = np.triu_indices(ctx.p)
    return np.abs(diff[lo_idx, hi_idx])


@dataclass(frozen=True)
class TallBoxSplit:
    lhs: complex
    rhs: complex
    inner_abs: np.ndarray  # |inner sum| per outer row, lexicographic
    outer_coords: np.ndarray  # matching outer coordinate rows
    max_inner_abs: float


def tall_box_identity(chi: Character, box: Box) -> TallBoxSplit:
    """Both sides of the pull-out-omega_n factorization of the box sum.

    lhs enumerates B directly; rhs evaluates chi(omega_n) times row-by-row
    inner sums over the last coordinate at shifted generators. The two agree
    up to roundoff for every box.
    """
    ctx = box.ctx
    n = ctx.n
    if n < 2:
        raise ValueError("tall box split needs n >= 2")
    lhs = box_char_sum(chi, box)

    w_n = box.basis.omega(n)
    w_inv = ctx.inv(w_n)
    ratios = [ctx.mul(box.basis.omega(i + 1), w_inv) for i in range(n - 1)]
    ratio_mat = np.array(ratios, dtype=np.int64)  # (n-1, n) power-basis rows

    axes = [
        np.arange(box.N[i] + 1, box.N[i] + box.H[i] + 1, dtype=np.int64)
        for i in range(n - 1)
    ]
    mesh = np.meshgrid(*axes, indexing="ij") if axes else []
    outer = np.stack([m.ravel() for m in mesh], axis=1)
    base_coeffs = (outer % ctx.p) @ ratio_mat % ctx.p
    base_idx = ctx.encode_array(base_coeffs)

    ts = np.arange(box.N[n - 1] + 1, box.N[n - 1] + box.H[n - 1] + 1, dtype=np.int64) % ctx.p
    d0 = base_idx % ctx.p
    inner_idx = base_idx[:, None] - d0[:, None] + (d0[:, None] + ts[None, :]) % ctx.p
    inner_vals = chi.values_at(inner_idx.ravel()).reshape(inner_idx.shape)
    inner = inner_vals.sum(axis=1)
    inner_abs = np.abs(inner)
    rhs = chi.value(w_n) * _fsum_complex(inner)
    return TallBoxSplit(lhs, rhs, inner_abs, outer, float(inner_abs.max(initial=0.0)))
