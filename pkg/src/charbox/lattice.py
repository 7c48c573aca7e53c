"""Exact successive minima of weighted lattices in dimension 2n.

Gamma_z couples multiplication by z to a rank-2n integer lattice; the gauge
bodies are the weighted sup-norm box D and its weighted l1 polar D*. All
gauge comparisons are integer cross-multiplications and every lambda comes
out as an exact Fraction together with an integer witness vector, so the
Minkowski certificate is a hard zero-tolerance assertion.

Enumeration pipeline: exact LLL on the weight-rescaled basis seeds the shell
size, then a depth-first sweep over a column-permuted Hermite triangular
basis lists every lattice vector of the current shell; shells double until
2n independent vectors exist.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .boxes import Box
from .field import BasisMatrix, FieldCtx, FqElem

DEFAULT_NODE_BUDGET = 10_000_000


class EnumerationBudgetError(RuntimeError):
    def __init__(self, msg: str, partial=None):
        super().__init__(msg)
        self.partial = partial


# ---------------------------------------------------------------------------
# exact linear algebra helpers


def _int_det(rows: Sequence[Sequence[int]]) -> int:
    """Bareiss fraction-free determinant."""
    a = [list(map(int, r)) for r in rows]
    m = len(a)
    sign = 1
    prev = 1
    for k in range(m - 1):
        if a[k][k] == 0:
            piv = next((r for r in range(k + 1, m) if a[r][k] != 0), None)
            if piv is None:
                return 0
            a[k], a[piv] = a[piv], a[k]
            sign = -sign
        for i in range(k + 1, m):
            for j in range(k + 1, m):
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) // prev
            a[i][k] = 0
        prev = a[k][k]
    return sign * a[-1][-1]


def _frac_inv(rows: Sequence[Sequence[int]]) -> list[list[Fraction]]:
    m = len(rows)
    a = [[Fraction(v) for v in r] + [Fraction(int(i == j)) for j in range(m)] for i, r in enumerate(rows)]
    for col in range(m):
        piv = next((r for r in range(col, m) if a[r][col] != 0), None)
        if piv is None:
            raise ValueError("singular matrix")
        a[col], a[piv] = a[piv], a[col]
        s = a[col][col]
        a[col] = [v / s for v in a[col]]
        for r in range(m):
            if r != col and a[r][col] != 0:
                f = a[r][col]
                a[r] = [v - f * w for v, w in zip(a[r], a[col])]
    return [row[m:] for row in a]


def _independent_add(echelon: list[list[int]], vec: Sequence[int]) -> bool:
    """Fraction-free elimination; if vec is independent, add it and return True."""
    v = list(map(int, vec))
    for row in echelon:
        c = next(i for i, x in enumerate(row) if x != 0)
        if v[c] != 0:
            v = [x * row[c] - y * v[c] for x, y in zip(v, row)]
    if not any(v):
        return False
    g = math.gcd(*[abs(x) for x in v])
    echelon.append([x // g for x in v])
    return True


# ---------------------------------------------------------------------------
# lattices and gauge bodies


@dataclass(frozen=True, eq=False)
class IntLattice:
    """Full-rank lattice {c @ rows / denom : c integer row vector}."""

    rows: tuple[tuple[int, ...], ...]
    denom: int = 1

    def __post_init__(self):
        object.__setattr__(self, "rows", tuple(tuple(int(v) for v in r) for r in self.rows))
        if self.denom < 1:
            raise ValueError("denom must be positive")
        if self.det == 0:
            raise ValueError("lattice basis is singular")

    @property
    def dim(self) -> int:
        return len(self.rows)

    @property
    def det(self) -> int:
        cached = getattr(self, "_det", None)
        if cached is None:
            cached = _int_det(self.rows)
            object.__setattr__(self, "_det", cached)
        return cached

    @property
    def covolume(self) -> Fraction:
        return Fraction(abs(self.det), self.denom**self.dim)

    @classmethod
    def integer_grid(cls, dim: int) -> "IntLattice":
        return cls(tuple(tuple(int(i == j) for j in range(dim)) for i in range(dim)))

    def coefficients_of(self, vec: Sequence[Fraction | int]) -> list[Fraction]:
        inv = getattr(self, "_inv", None)
        if inv is None:
            inv = _frac_inv(self.rows)
            object.__setattr__(self, "_inv", inv)
        scaled = [Fraction(v) * self.denom for v in vec]
        return [sum(scaled[k] * inv[k][i] for k in range(self.dim)) for i in range(self.dim)]

    def contains(self, vec: Sequence[Fraction | int]) -> bool:
        return all(c.denominator == 1 for c in self.coefficients_of(vec))

    def vectors(self) -> list[list[Fraction]]:
        return [[Fraction(v, self.denom) for v in row] for row in self.rows]


def polar_of(lattice: IntLattice) -> IntLattice:
    """Dual lattice {u : <u, v> integer for all v in the lattice}."""
    det = lattice.det
    inv = _frac_inv(lattice.rows)
    m = lattice.dim
    adj_t = [[inv[j][i] * det for j in range(m)] for i in range(m)]  # adj(R)^T rows
    rows = [[Fraction(lattice.denom) * adj_t[i][j] for j in range(m)] for i in range(m)]
    den = abs(det)
    sign = 1 if det > 0 else -1
    int_rows = []
    for r in rows:
        out_row = []
        for v in r:
            scaled = v * sign
            assert scaled.denominator == 1
            out_row.append(int(scaled))
        int_rows.append(out_row)
    g = den
    for r in int_rows:
        for v in r:
            g = math.gcd(g, abs(v))
    return IntLattice(tuple(tuple(v // g for v in r) for r in int_rows), den // g)


@dataclass(frozen=True)
class GaugeBody:
    """Weighted sup-norm box D ('box') or its weighted l1 polar D* ('polar').

    Coordinates pair up as (x_1..x_n, y_1..y_n) with shared weights H_i.
    """

    kind: str
    weights: tuple[int, ...]

    def __post_init__(self):
        if self.kind not in ("box", "polar"):
            raise ValueError("kind must be 'box' or 'polar'")
        if any(w < 1 for w in self.weights):
            raise ValueError("weights must be positive integers")
        object.__setattr__(self, "weights", tuple(int(w) for w in self.weights))

    @property
    def dim(self) -> int:
        return 2 * len(self.weights)

    def coord_weights(self) -> tuple[int, ...]:
        return self.weights + self.weights

    def volume(self) -> Fraction:
        prod_sq = math.prod(self.weights) ** 2
        if self.kind == "box":
            return Fraction(2**self.dim * prod_sq)
        return Fraction(2**self.dim, math.factorial(self.dim) * prod_sq)

    def gauge_scale(self, denom: int) -> int:
        """L such that every gauge value of a denom-scaled integer vector is
        an integer key over L."""
        if self.kind == "box":
            return denom * math.lcm(*self.weights)
        return denom

    def gauge_key(self, vec: Sequence[int], denom: int) -> int:
        """Integer K with gauge(vec/denom) = K / gauge_scale(denom)."""
        w = self.coord_weights()
        if self.kind == "box":
            scale = self.gauge_scale(denom)
            return max(abs(v) * (scale // (denom * wi)) for v, wi in zip(vec, w))
        return sum(abs(v) * wi for v, wi in zip(vec, w))

    def gauge(self, vec: Sequence[int], denom: int) -> Fraction:
        return Fraction(self.gauge_key(vec, denom), self.gauge_scale(denom))

    def coordinate_bounds(self, lam: Fraction, denom: int) -> list[int]:
        """Largest |v_j| compatible with gauge <= lam."""
        w = self.coord_weights()
        if self.kind == "box":
            return [int(lam * denom * wi) for wi in w]
        cap = int(lam * denom)
        return [cap // wi for wi in w]

    def l1_cap(self, lam: Fraction, denom: int) -> int | None:
        if self.kind == "polar":
            return int(lam * denom)
        return None


def sup_box_body(weights: Sequence[int]) -> GaugeBody:
    return GaugeBody("box", tuple(weights))


def polar_body(weights: Sequence[int]) -> GaugeBody:
    return GaugeBody("polar", tuple(weights))


# ---------------------------------------------------------------------------
# exact LLL seeding


def _lll_rows(rows: Sequence[Sequence[int]], scale: Sequence[Fraction]) -> list[list[int]]:
    """LLL-reduce integer rows under the rescaled l2 metric; exact arithmetic."""
    basis = [[Fraction(v) * s for v, s in zip(r, scale)] for r in rows]
    ints = [list(map(int, r)) for r in rows]
    m = len(basis)

    def gram_schmidt():
        ortho: list[list[Fraction]] = []
        for vec in basis:
            w = list(vec)
            for u in ortho:
                uu = sum(x * x for x in u)
                if uu:
                    f = sum(x * y for x, y in zip(w, u)) / uu
                    w = [x - f * y for x, y in zip(w, u)]
            ortho.append(w)
        return ortho

    ortho = gram_schmidt()
    delta = Fraction(3, 4)
    k = 1
    guard = 0
    while k < m and guard < 10_000:
        guard += 1
        for j in range(k - 1, -1, -1):
            uu = sum(x * x for x in ortho[j])
            if not uu:
                continue
            mu = sum(x * y for x, y in zip(basis[k], ortho[j])) / uu
            if abs(mu) > Fraction(1, 2):
                r = round(mu)
                basis[k] = [x - r * y for x, y in zip(basis[k], basis[j])]
                ints[k] = [x - r * y for x, y in zip(ints[k], ints[j])]
        uu_prev = sum(x * x for x in ortho[k - 1])
        mu_k = (
            sum(x * y for x, y in zip(basis[k], ortho[k - 1])) / uu_prev if uu_prev else Fraction(0)
        )
        if sum(x * x for x in ortho[k]) >= (delta - mu_k * mu_k) * uu_prev:
            k += 1
        else:
            basis[k], basis[k - 1] = basis[k - 1], basis[k]
            ints[k], ints[k - 1] = ints[k - 1], ints[k]
            ortho = gram_schmidt()
            k = max(k - 1, 1)
    return ints


# ---------------------------------------------------------------------------
# Hermite-triangular enumeration


def _hnf_upper(rows: Sequence[Sequence[int]]) -> list[list[int]] | None:
    """Row-span-preserving upper-triangular form with positive diagonal and
    entries above each pivot reduced into [0, pivot)."""
    h = [list(map(int, r)) for r in rows]
    m = len(h)
    for col in range(m):
        while True:
            nz = [r for r in range(col, m) if h[r][col] != 0]
            if not nz:
                return None
            if len(nz) == 1:
                break
            nz.sort(key=lambda r: abs(h[r][col]))
            r0, r1 = nz[0], nz[1]
            q = h[r1][col] // h[r0][col]
            h[r1] = [a - q * b for a, b in zip(h[r1], h[r0])]
        r = nz[0]
        if h[r][col] < 0:
            h[r] = [-a for a in h[r]]
        h[col], h[r] = h[r], h[col]
        for rr in range(col):
            q = h[rr][col] // h[col][col]
            if q:
                h[rr] = [a - q * b for a, b in zip(h[rr], h[col])]
    return h


class _NodeCounter:
    __slots__ = ("nodes", "budget")

    def __init__(self, budget: int):
        self.nodes = 0
        self.budget = budget

    def spend(self, k: int = 1):
        self.nodes += k
        if self.nodes > self.budget:
            raise EnumerationBudgetError(f"enumeration exceeded {self.budget} nodes")


def _enumerate_shell(
    hnf: list[list[int]],
    bounds: list[int],
    l1_weights: tuple[int, ...] | None,
    l1_cap: int | None,
    counter: _NodeCounter,
) -> np.ndarray:
    """All nonzero lattice vectors v = c @ hnf with |v_j| <= bounds[j]
    (and the l1 cap, when given), in the hnf coordinate order."""
    m = len(hnf)
    out: list[tuple[int, ...]] = []
    acc = [0] * m

    def descend(level: int, running: int):
        if level == m:
            if any(acc):
                out.append(tuple(acc))
            return
        hrow = hnf[level]
        piv = hrow[level]
        cb = bounds[level]
        if l1_cap is not None:
            rem = (l1_cap - running) // l1_weights[level]
            if rem < cb:
                cb = rem
        if cb < 0:
            return
        base = acc[level]
        c_lo = -((cb + base) // piv)
        c_hi = (cb - base) // piv
        if c_lo > c_hi:
            return
        counter.spend(c_hi - c_lo + 1)
        saved = acc[level:]
        for j in range(level, m):
            acc[j] += c_lo * hrow[j]
        for _ in range(c_lo, c_hi + 1):
            if l1_cap is not None:
                descend(level + 1, running + l1_weights[level] * abs(acc[level]))
            else:
                descend(level + 1, running)
            for j in range(level, m):
                acc[j] += hrow[j]
        acc[level:] = saved

    descend(0, 0)
    if not out:
        return np.empty((0, m), dtype=np.int64)
    return np.array(out, dtype=np.int64)


def _sign_normalize(vecs: np.ndarray) -> np.ndarray:
    """Flip signs so the first nonzero entry of each row is positive."""
    if len(vecs) == 0:
        return vecs
    first = np.argmax(vecs != 0, axis=1)
    signs = np.sign(vecs[np.arange(len(vecs)), first])
    return vecs * signs[:, None]


@dataclass(frozen=True, eq=False)
class MinimaResult:
    """Exact successive minima with independent witnesses."""

    lattice: IntLattice
    body: GaugeBody
    lambdas: tuple[Fraction, ...]
    witnesses: tuple[tuple[int, ...], ...]
    nodes: int

    @property
    def s(self) -> int:
        """max{j : lambda_j <= 1} (0 when even lambda_1 exceeds 1)."""
        return sum(1 for lam in self.lambdas if lam <= 1)

    def minkowski_product(self) -> Fraction:
        return math.prod(self.lambdas, start=Fraction(1)) * self.body.volume() / self.lattice.covolume

    def minkowski_certificate(self) -> tuple[Fraction, Fraction, Fraction]:
        """(lower, product, upper) with lower <= product <= upper exactly iff
        the two-sided Minkowski second theorem holds."""
        d = self.body.dim
        return Fraction(2**d, math.factorial(d)), self.minkowski_product(), Fraction(2**d)

    def minkowski_ok(self) -> bool:
        lo, mid, hi = self.minkowski_certificate()
        return lo <= mid <= hi


def _column_orders(dim: int) -> list[list[int]]:
    half = dim // 2
    orders = [list(range(dim))]
    if dim % 2 == 0 and half >= 1:
        orders.append(list(range(half, dim)) + list(range(half)))
    orders.append(list(reversed(range(dim))))
    return orders


def _pick_hnf(rows: Sequence[Sequence[int]], bounds: list[int]) -> tuple[list[list[int]], list[int]]:
    """Choose the column order whose triangular form promises the fewest
    enumeration nodes for the given per-coordinate bounds."""
    best = None
    for order in _column_orders(len(rows)):
        permuted = [[r[j] for j in order] for r in rows]
        h = _hnf_upper(permuted)
        if h is None:
            continue
        est = 1.0
        for lvl in range(len(h)):
            est *= max(1.0, (2 * bounds[order[lvl]]) / h[lvl][lvl] + 1.0)
            if best is not None and est >= best[0]:
                break
        if best is None or est < best[0]:
            best = (est, h, order)
    if best is None:
        raise ValueError("lattice basis is singular")
    return best[1], best[2]


def _shell_vectors(
    lattice: IntLattice, body: GaugeBody, lam: Fraction, counter: _NodeCounter
) -> np.ndarray:
    bounds = body.coordinate_bounds(lam, lattice.denom)
    hnf, order = _pick_hnf(lattice.rows, bounds)
    w = body.coord_weights()
    l1_cap = body.l1_cap(lam, lattice.denom)
    l1_weights = tuple(w[j] for j in order) if l1_cap is not None else None
    perm_bounds = [bounds[j] for j in order]
    vecs = _enumerate_shell(hnf, perm_bounds, l1_weights, l1_cap, counter)
    if len(vecs) == 0:
        return vecs
    undo = np.argsort(order)
    return vecs[:, undo]


def _lll_seed_gauges(lattice: IntLattice, body: GaugeBody) -> tuple[Fraction, Fraction]:
    w = body.coord_weights()
    if body.kind == "box":
        scale = [Fraction(1, lattice.denom * wi) for wi in w]
    else:
        scale = [Fraction(wi, lattice.denom) for wi in w]
    reduced = _lll_rows(lattice.rows, scale)
    gauges = [body.gauge(r, lattice.denom) for r in reduced]
    return min(gauges), max(gauges)


def successive_minima(
    lattice: IntLattice, body: GaugeBody, node_budget: int = DEFAULT_NODE_BUDGET
) -> MinimaResult:
    """Exact lambda_1..lambda_dim with greedy canonical witnesses.

    On budget exhaustion the raised error carries the minima certified by the
    last completed shell (those are exact: every vector up to their gauge was
    enumerated).
    """
    m = lattice.dim
    if body.dim != m:
        raise ValueError("body dimension does not match lattice")
    counter = _NodeCounter(node_budget)
    lam_min, lam_max = _lll_seed_gauges(lattice, body)
    shell = lam_min
    best = None
    while True:
        try:
            vecs = _shell_vectors(lattice, body, shell, counter)
        except EnumerationBudgetError as exc:
            exc.partial = best
            raise
        picked = _greedy_minima(lattice, body, vecs)
        if picked is not None:
            best = picked
        if picked is not None and len(picked[0]) == m:
            lams, wits = picked
            return MinimaResult(lattice, body, tuple(lams), tuple(wits), counter.nodes)
        if shell >= lam_max:
            raise EnumerationBudgetError("shell reached LLL cap without full rank (bug)")
        shell = min(shell * 2, lam_max)


def _greedy_minima(lattice: IntLattice, body: GaugeBody, vecs: np.ndarray):
    """Sort enumerated vectors by (gauge, canonical order) and keep the first
    linearly independent ones."""
    if len(vecs) == 0:
        return None
    m = lattice.dim
    scale = body.gauge_scale(lattice.denom)
    w = body.coord_weights()
    av = np.abs(vecs)
    if body.kind == "box":
        mult = np.array([scale // (lattice.denom * wi) for wi in w], dtype=np.int64)
        keys = (av * mult).max(axis=1)
    else:
        keys = av @ np.array(w, dtype=np.int64)
    canon = _sign_normalize(vecs)
    order = np.lexsort(tuple(canon[:, j] for j in reversed(range(m))) + (keys,))
    lams: list[Fraction] = []
    wits: list[tuple[int, ...]] = []
    echelon: list[list[int]] = []
    for i in order:
        vec = tuple(int(x) for x in canon[i])
        if _independent_add(echelon, vec):
            lams.append(Fraction(int(keys[i]), scale))
            wits.append(vec)
            if len(wits) == m:
                break
    return lams, wits


def first_minimum(
    lattice: IntLattice, body: GaugeBody, node_budget: int = DEFAULT_NODE_BUDGET
) -> tuple[Fraction, tuple[int, ...]]:
    """lambda_1 with its canonical witness (cheaper than full minima)."""
    counter = _NodeCounter(node_budget)
    lam_min, _ = _lll_seed_gauges(lattice, body)
    vecs = _shell_vectors(lattice, body, lam_min, counter)
    picked = _greedy_minima(lattice, body, vecs)
    assert picked is not None, "seed shell contains an LLL basis vector"
    return picked[0][0], picked[1][0]


# ---------------------------------------------------------------------------
# the multiplication lattices Gamma_z


def mult_matrix(ctx: FieldCtx, basis: BasisMatrix, z: FqElem) -> np.ndarray:
    """A_z with coords(z * x) = A_z @ coords(x) mod p, coords in the omega basis."""
    cols = [basis.coords_of(ctx.mul(z, basis.omega(i + 1))) for i in range(ctx.n)]
    return np.array(cols, dtype=np.int64).T


def gamma_z(ctx: FieldCtx, basis: BasisMatrix, z: FqElem) -> IntLattice:
    """{(x, y) in Z^{2n} : z * (sum x_i omega_i) = sum y_i omega_i mod p}."""
    n = ctx.n
    a = mult_matrix(ctx, basis, z) % ctx.p
    rows = []
    for i in range(n):
        rows.append(tuple(int(i == j) for j in range(n)) + tuple(int(v) for v in a[:, i]))
    for j in range(n):
        rows.append((0,) * n + tuple(ctx.p * int(j == k) for k in range(n)))
    return IntLattice(tuple(rows))


def gamma_z_contains(ctx: FieldCtx, basis: BasisMatrix, z: FqElem, vec: Sequence[int]) -> bool:
    """Congruence-side membership oracle: y = A_z x mod p."""
    n = ctx.n
    a = mult_matrix(ctx, basis, z)
    x = np.array(vec[:n], dtype=np.int64)
    y = np.array(vec[n:], dtype=np.int64)
    return bool((((a @ x) - y) % ctx.p == 0).all())


def minima_for_z(box: Box, z: FqElem, node_budget: int = DEFAULT_NODE_BUDGET) -> MinimaResult:
    """Successive minima of the box gauge D for Gamma_z of the given box."""
    ctx = box.ctx
    return successive_minima(gamma_z(ctx, box.basis, z), sup_box_body(box.H), node_budget)


def lambda1_star(
    box: Box, z: FqElem, node_budget: int = DEFAULT_NODE_BUDGET
) -> tuple[Fraction, tuple[int, ...]]:
    """First minimum of the polar body D* over the polar lattice Gamma_z^*.

    The witness is in the polar integer scale: the vector is witness / denom
    of the polar lattice (denom = p for Gamma_z^*).
    """
    dual = polar_of(gamma_z(box.ctx, box.basis, z))
    return first_minimum(dual, polar_body(box.H), node_budget)


@dataclass(frozen=True, eq=False)
class ZClassification:
    """Dyadic classes and s(z) for one z, with witness recovery."""

    z: FqElem
    lambdas: tuple[Fraction, ...]
    lambda1_star: Fraction
    j: int
    j_star: int | None
    s: int
    recovered_z: FqElem
    witness: tuple[int, ...]
    transference_product: Fraction  # lambda_1^* x lambda_{2n}


def _dyadic_index(t: Fraction) -> int:
    """j with 2^(j-1) <= t < 2^j (so j = floor(log2 t) + 1), t > 0."""
    if t <= 0:
        raise ValueError("dyadic index needs t > 0")
    j = 1
    while t >= 2:
        t /= 2
        j += 1
    while t < 1:
        t *= 2
        j -= 1
    return j


def classify_z(box: Box, z: FqElem, node_budget: int = DEFAULT_NODE_BUDGET) -> ZClassification:
    """Dyadic class j from H_{n-1} lambda_1, polar class j' from p lambda_1^*/H_1,
    s(z), and recovery of z from the first witness."""
    nb = box.normalize()
    ctx = nb.ctx
    n = ctx.n
    if ctx.in_prime_subfield(z):
        raise ValueError("classification applies to z outside F_p")
    minima = minima_for_z(nb, z, node_budget)
    if minima.lambdas[0] > 1:
        raise ValueError("z is not in Z for this box (lambda_1 > 1)")
    weight = nb.H[n - 2] if n >= 2 else nb.H[0]
    j = _dyadic_index(weight * minima.lambdas[0])

    lam_star, _wit = lambda1_star(nb, z, node_budget)
    j_star = None
    if lam_star <= 1:
        j_star = _dyadic_index(Fraction(ctx.p) * lam_star / nb.H[0])

    wit = minima.witnesses[0]
    x_elem = nb.basis.elem_from_coords(wit[:n])
    y_elem = nb.basis.elem_from_coords(wit[n:])
    if not any(x_elem):
        raise RuntimeError("lambda_1 witness has zero x-half (internal error)")
    recovered = ctx.div(y_elem, x_elem)
    return ZClassification(
        z,
        minima.lambdas,
        lam_star,
        j,
        j_star,
        minima.s,
        recovered,
        wit,
        lam_star * minima.lambdas[-1],
    )
