"""Deterministic seeded sampling of bases, boxes, characters and z-values.

Every sampler derives its stream from a SeedSequence keyed by the caller's
seed plus a structural key, so grids are reproducible row by row and do not
depend on worker scheduling.
"""

from __future__ import annotations

import math

import numpy as np

from .boxes import Box
from .characters import Character
from .field import BasisMatrix, FieldCtx


def rng_for(seed: int, *key: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(entropy=[seed, *key]))


def small_edge_cap(p: int) -> int:
    """Largest integer edge strictly below sqrt(p/2)."""
    cap = int(math.sqrt(p / 2))
    while cap + 1 < math.sqrt(p / 2):
        cap += 1
    while cap >= math.sqrt(p / 2):
        cap -= 1
    return max(1, cap)


def sample_basis(ctx: FieldCtx, rng: np.random.Generator) -> BasisMatrix:
    from .field import FieldError

    while True:
        cols = rng.integers(0, ctx.p, size=(ctx.n, ctx.n))
        try:
            return BasisMatrix(ctx, cols)
        except FieldError:
            continue


def sample_box(basis: BasisMatrix, rng: np.random.Generator, regime: str = "small") -> Box:
    """regime: 'small' (all H_i < sqrt(p/2)), 'any', 'tall' (H_n near p, others
    small), or 'admissible' (|B| >= p^{n(1/4 + 0.3)})."""
    ctx = basis.ctx
    p, n = ctx.p, ctx.n
    cap = small_edge_cap(p)
    offsets = tuple(int(v) for v in rng.integers(-p, p + 1, size=n))
    if regime == "small":
        edges = tuple(int(v) for v in rng.integers(1, cap + 1, size=n))
    elif regime == "any":
        edges = tuple(int(v) for v in rng.integers(1, p + 1, size=n))
    elif regime == "tall":
        lo = int(p ** 0.85)
        edges = tuple(int(v) for v in rng.integers(1, cap + 1, size=n - 1)) + (
            int(rng.integers(max(2, lo), p + 1)),
        )
    elif regime == "admissible":
        target = p ** (n * (0.25 + 0.3))
        while True:
            edges = tuple(int(v) for v in rng.integers(1, p + 1, size=n))
            if math.prod(edges) >= target:
                break
    else:
        raise ValueError(f"unknown box regime {regime!r}")
    return Box(basis, offsets, edges)


def sample_character(ctx: FieldCtx, rng: np.random.Generator, nontrivial: bool = True,
                     trivial_on_prime_subfield: bool | None = None) -> Character:
    lo = 1 if nontrivial else 0
    while True:
        if trivial_on_prime_subfield:
            # multiples of p-1 restrict trivially to F_p^*
            k = (ctx.p - 1) * int(rng.integers(1, ctx.q1 // (ctx.p - 1)))
        else:
            k = int(rng.integers(lo, ctx.q1))
        chi = Character(ctx, k)
        if nontrivial and chi.is_trivial:
            continue
        if trivial_on_prime_subfield is False and chi.is_trivial_on_prime_subfield():
            continue
        return chi


def sample_z(ctx: FieldCtx, rng: np.random.Generator, outside_prime_subfield: bool = True):
    while True:
        z = ctx.decode(int(rng.integers(1, ctx.q)))
        if outside_prime_subfield and ctx.in_prime_subfield(z):
            continue
        return z
