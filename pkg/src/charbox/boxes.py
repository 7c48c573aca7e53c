"""Boxes (axis-aligned parallelepipeds) in F_{p^n} and their transforms.

A box is a basis plus integer offsets N_i and edges H_i; its elements are
sum_i x_i omega_i with N_i + 1 <= x_i <= N_i + H_i. Offsets are arbitrary
integers; reduction mod p happens at element construction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator

import numpy as np

from .field import BasisMatrix, FieldCtx, FqElem


class BoxError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class Box:
    basis: BasisMatrix
    N: tuple[int, ...]
    H: tuple[int, ...]

    def __post_init__(self):
        n = self.ctx.n
        object.__setattr__(self, "N", tuple(int(v) for v in self.N))
        object.__setattr__(self, "H", tuple(int(v) for v in self.H))
        if len(self.N) != n or len(self.H) != n:
            raise BoxError(f"box needs {n} offset:edge pairs")
        for h in self.H:
            if not 1 <= h <= self.ctx.p:
                raise BoxError(f"edges must satisfy 1 <= H_i <= p, got {h}")

    @property
    def ctx(self) -> FieldCtx:
        return self.basis.ctx

    @property
    def size(self) -> int:
        return math.prod(self.H)

    def ranges(self) -> list[range]:
        return [range(nn + 1, nn + hh + 1) for nn, hh in zip(self.N, self.H)]

    @property
    def is_sorted(self) -> bool:
        return all(a <= b for a, b in zip(self.H, self.H[1:]))

    def normalize(self) -> "Box":
        """Permute coordinates (basis columns with N, H) so H is ascending."""
        order = sorted(range(len(self.H)), key=lambda i: self.H[i])
        if order == list(range(len(self.H))):
            return self
        return Box(
            self.basis.permute(order),
            tuple(self.N[i] for i in order),
            tuple(self.H[i] for i in order),
        )

    def coords_grid(self) -> np.ndarray:
        """All coordinate vectors, shape (size, n), lexicographic order."""
        axes = [np.arange(nn + 1, nn + hh + 1, dtype=np.int64) for nn, hh in zip(self.N, self.H)]
        mesh = np.meshgrid(*axes, indexing="ij")
        return np.stack([m.ravel() for m in mesh], axis=1)

    def element_indices(self) -> np.ndarray:
        """Encoded field elements in lexicographic coordinate order."""
        coords = self.coords_grid() % self.ctx.p
        return self.ctx.encode_array((coords @ self.basis.cols.T) % self.ctx.p)

    def elements(self) -> Iterator[tuple[tuple[int, ...], FqElem]]:
        """Stream of (coords, element), lexicographic in box coordinates."""
        coords = self.coords_grid()
        ctx = self.ctx
        for row in coords:
            yield tuple(int(v) for v in row), self.basis.elem_from_coords(row)

    def __repr__(self) -> str:
        return f"Box(p={self.ctx.p}, n={self.ctx.n}, N={self.N}, H={self.H})"


def parse_box_spec(basis: BasisMatrix, spec: str) -> Box:
    """Parse the CLI literal "N1:H1,N2:H2[,N3:H3]"."""
    parts = spec.split(",")
    try:
        pairs = [tuple(int(v) for v in part.split(":")) for part in parts]
        if any(len(pair) != 2 for pair in pairs):
            raise ValueError
    except ValueError:
        raise BoxError(f"bad box literal {spec!r}; expected N1:H1,N2:H2[,N3:H3]") from None
    return Box(basis, tuple(p[0] for p in pairs), tuple(p[1] for p in pairs))


def format_box_spec(box: Box) -> str:
    return ",".join(f"{nn}:{hh}" for nn, hh in zip(box.N, box.H))


def difference_box(box: Box) -> Box:
    """Symmetric set of coordinate differences: ranges [-H_i, H_i]."""
    if any(2 * h + 1 > box.ctx.p for h in box.H):
        raise BoxError("difference box needs 2H_i + 1 <= p for distinct elements")
    return Box(box.basis, tuple(-h - 1 for h in box.H), tuple(2 * h + 1 for h in box.H))


def scaled_box(box: Box, delta: float) -> Box:
    """Shrunk nonnegative box with ranges [0, floor(p^(-2 delta) H_i)]."""
    if not 0 < delta < 0.5:
        raise BoxError(f"delta must lie in (0, 1/2), got {delta}")
    shrink = box.ctx.p ** (-2 * delta)
    return Box(box.basis, (-1,) * box.ctx.n, tuple(int(shrink * h) + 1 for h in box.H))


def omega_line_intersection(box: Box) -> int:
    """|B intersect omega_n F_p|: H_n if every range x_i, i < n, covers a
    multiple of p (the coordinate 0 mod p), else 0."""
    p = box.ctx.p
    for i in range(box.ctx.n - 1):
        lo, hi = box.N[i] + 1, box.N[i] + box.H[i]
        if (hi // p) * p < lo:  # largest multiple of p below hi misses the range
            return 0
    return box.H[box.ctx.n - 1]


def omega_line_count_bruteforce(box: Box) -> int:
    """Oracle: enumerate B and count elements proportional to omega_n."""
    count = 0
    for _, elem in box.elements():
        coords = box.basis.coords_of(elem)
        if not any(coords[:-1]):
            count += 1
    return count


def subdivide_box(box: Box) -> list[Box]:
    """Split every edge >= sqrt(p/2) into near-equal integer pieces below
    sqrt(p/2); pieces of one edge differ in length by at most 1."""
    threshold = math.sqrt(box.ctx.p / 2)
    per_axis: list[list[tuple[int, int]]] = []
    for nn, hh in zip(box.N, box.H):
        if hh < threshold:
            per_axis.append([(nn, hh)])
            continue
        k = math.ceil(hh / (threshold - 1)) if threshold > 1 else hh
        base, rem = divmod(hh, k)
        pieces = []
        off = nn
        for j in range(k):
            ln = base + (1 if j < rem else 0)
            pieces.append((off, ln))
            off += ln
        per_axis.append(pieces)
    out = []
    for combo_idx in np.ndindex(*[len(a) for a in per_axis]):
        combo = [per_axis[i][j] for i, j in enumerate(combo_idx)]
        out.append(Box(box.basis, tuple(c[0] for c in combo), tuple(c[1] for c in combo)))
    return out


def degenerate_pair_closed_form(box: Box) -> set[tuple[int, int]]:
    """Closed form of the degenerate pair set: the unique pair of
    coordinates that are 0 mod p, when both outer ranges contain one."""
    p = box.ctx.p
    hits = []
    for i in range(2):
        lo, hi = box.N[i] + 1, box.N[i] + box.H[i]
        mult = (hi // p) * p
        if mult < lo:
            return set()
        hits.append(mult)
    return {(hits[0], hits[1])}


def degenerate_pair_set(box: Box, scan_budget: int = 2**22) -> set[tuple[int, int]]:
    """A = {(x_1, x_2): x_1 omega_1/omega_3 + x_2 omega_2/omega_3 lies in F_p},
    computed by direct scan over I_1 x I_2."""
    ctx = box.ctx
    if ctx.n != 3:
        raise BoxError("degenerate pair set is defined for n = 3 boxes")
    if box.H[0] * box.H[1] > scan_budget:
        raise BoxError("outer grid exceeds scan budget")
    w3_inv = ctx.inv(box.basis.omega(3))
    c1 = np.array(ctx.mul(box.basis.omega(1), w3_inv), dtype=np.int64)
    c2 = np.array(ctx.mul(box.basis.omega(2), w3_inv), dtype=np.int64)
    r1 = np.arange(box.N[0] + 1, box.N[0] + box.H[0] + 1, dtype=np.int64)
    r2 = np.arange(box.N[1] + 1, box.N[1] + box.H[1] + 1, dtype=np.int64)
    # coefficients of x1*c1 + x2*c2 beyond the constant one must vanish
    tail = (
        r1[:, None, None] * c1[None, None, 1:] + r2[None, :, None] * c2[None, None, 1:]
    ) % ctx.p
    bad = np.argwhere((tail == 0).all(axis=2))
    return {(int(r1[i]), int(r2[j])) for i, j in bad}
