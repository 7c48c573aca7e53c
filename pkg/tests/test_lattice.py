import math
from fractions import Fraction

import numpy as np
import pytest

from charbox import (
    BasisMatrix,
    Box,
    EnumerationBudgetError,
    IntLattice,
    cached_field,
    classify_z,
    difference_box,
    gamma_z,
    gamma_z_contains,
    lambda1_star,
    minima_for_z,
    mult_matrix,
    polar_body,
    polar_of,
    successive_minima,
    sup_box_body,
)
from charbox.sampling import small_edge_cap, rng_for, sample_basis, sample_z


def random_key_box(ctx, rng):
    basis = sample_basis(ctx, rng)
    cap = small_edge_cap(ctx.p)
    return Box(
        basis,
        tuple(int(v) for v in rng.integers(-ctx.p, ctx.p, size=ctx.n)),
        tuple(sorted(int(v) for v in rng.integers(1, cap + 1, size=ctx.n))),
    )


def z_from_ratio_set(box, rng):
    ctx = box.ctx
    idx = difference_box(box).element_indices()
    nz = idx[idx != 0]
    while True:
        xi, yi = (int(v) for v in rng.integers(0, len(nz), size=2))
        z = ctx.div(ctx.decode(int(nz[yi])), ctx.decode(int(nz[xi])))
        if not ctx.in_prime_subfield(z):
            return z


class TestMultMatrix:
    def test_scalar_is_diagonal(self, f31_3, id_basis_31_3):
        ctx = cached_field(31, 3, seed=0)
        a = mult_matrix(ctx, id_basis_31_3, ctx.from_int(7))
        assert (a == 7 * np.eye(3, dtype=np.int64)).all()

    def test_zero_matrix(self, f31_3, id_basis_31_3):
        ctx = cached_field(31, 3, seed=0)
        assert not mult_matrix(ctx, id_basis_31_3, ctx.zero()).any()

    def test_against_field_arithmetic(self, f31_3):
        ctx = cached_field(31, 3, seed=0)
        rng = rng_for(1, 0)
        basis = sample_basis(ctx, rng)
        z = ctx.decode(12345)
        a = mult_matrix(ctx, basis, z)
        for _ in range(100):
            coords = rng.integers(0, 31, size=3)
            x = basis.elem_from_coords(coords)
            lhs = tuple(int(v) for v in (a @ coords) % 31)
            assert lhs == basis.coords_of(ctx.mul(z, x))


class TestGammaZ:
    def test_covolume_p_cubed(self, f31_3):
        ctx = cached_field(31, 3, seed=0)
        basis = sample_basis(ctx, rng_for(1, 1))
        lat = gamma_z(ctx, basis, ctx.decode(999))
        assert lat.det == 31**3
        assert lat.covolume == 31**3

    def test_generators_belong(self, f31_3):
        ctx = cached_field(31, 3, seed=0)
        basis = sample_basis(ctx, rng_for(1, 2))
        z = ctx.decode(777)
        lat = gamma_z(ctx, basis, z)
        for row in lat.rows:
            assert gamma_z_contains(ctx, basis, z, row)

    def test_solve_agrees_with_congruence(self, f31_3):
        ctx = cached_field(31, 3, seed=0)
        rng = rng_for(1, 3)
        basis = sample_basis(ctx, rng)
        z = ctx.decode(4321)
        lat = gamma_z(ctx, basis, z)
        for _ in range(100):
            vec = [int(v) for v in rng.integers(-80, 80, size=6)]
            assert lat.contains(vec) == gamma_z_contains(ctx, basis, z, vec)


class TestSuccessiveMinima:
    def test_unit_grid_unit_cube(self):
        for n in (1, 2, 3):
            res = successive_minima(IntLattice.integer_grid(2 * n), sup_box_body((1,) * n))
            assert res.lambdas == (Fraction(1),) * (2 * n)
            assert res.minkowski_ok()

    def test_z_one_equal_edges(self, f31_3):
        ctx = cached_field(31, 3, seed=0)
        basis = sample_basis(ctx, rng_for(1, 4))
        box = Box(basis, (0, 0, 0), (3, 3, 3))
        res = minima_for_z(box, ctx.one())
        assert res.lambdas[0] == Fraction(1, 3)
        assert res.witnesses[0] == (0, 0, 1, 0, 0, 1)  # (e_n, e_n)

    def test_witnesses_realize_gauges_and_membership(self, f31_3):
        ctx = cached_field(31, 3, seed=0)
        rng = rng_for(1, 5)
        box = random_key_box(ctx, rng)
        z = sample_z(ctx, rng)
        res = minima_for_z(box, z)
        body = sup_box_body(box.H)
        for lam, wit in zip(res.lambdas, res.witnesses):
            assert body.gauge(wit, 1) == lam
            assert gamma_z_contains(ctx, box.basis, z, wit)

    def test_lower_bounds_for_nonsubfield_z(self):
        for (p, n) in ((31, 3), (61, 3), (31, 2)):
            ctx = cached_field(p, n, seed=0)
            rng = rng_for(1, 6, p, n)
            for _ in range(8):
                box = random_key_box(ctx, rng)
                z = sample_z(ctx, rng)
                res = minima_for_z(box, z)
                if n == 3:
                    assert res.lambdas[0] >= Fraction(1, box.H[1])
                    assert res.lambdas[1] >= Fraction(1, box.H[0])
                else:
                    assert res.lambdas[0] >= Fraction(1, box.H[0])

    def test_minkowski_certificate_random(self):
        ctx = cached_field(61, 2, seed=0)
        rng = rng_for(1, 7)
        for _ in range(10):
            box = random_key_box(ctx, rng)
            z = ctx.decode(int(rng.integers(1, ctx.q)))
            res = minima_for_z(box, z)
            lo, mid, hi = res.minkowski_certificate()
            assert lo <= mid <= hi

    def test_budget_error_carries_partial(self, f31_3):
        ctx = cached_field(31, 3, seed=0)
        basis = sample_basis(ctx, rng_for(1, 8))
        box = Box(basis, (0, 0, 0), (3, 3, 3))
        with pytest.raises(EnumerationBudgetError) as err:
            minima_for_z(box, ctx.one(), node_budget=80)
        assert err.value.partial is None  # first shell already over budget

        with pytest.raises(EnumerationBudgetError) as err:
            minima_for_z(box, ctx.one(), node_budget=500)
        lams, wits = err.value.partial  # minima certified by the completed shell
        assert list(lams) == [Fraction(1, 3)] * 3  # z = 1, equal edges
        assert len(wits) == 3

    def test_deterministic_witnesses(self, f31_3):
        ctx = cached_field(31, 3, seed=0)
        rng = rng_for(1, 9)
        box = random_key_box(ctx, rng)
        z = sample_z(ctx, rng)
        a = minima_for_z(box, z)
        b = minima_for_z(box, z)
        assert a.lambdas == b.lambdas and a.witnesses == b.witnesses


class TestPolar:
    def test_integer_grid_self_dual(self):
        lat = IntLattice.integer_grid(4)
        dual = polar_of(lat)
        assert dual.rows == lat.rows and dual.denom == 1

    def test_covolume_product_one(self, f31_3):
        ctx = cached_field(31, 3, seed=0)
        basis = sample_basis(ctx, rng_for(1, 10))
        lat = gamma_z(ctx, basis, ctx.decode(555))
        dual = polar_of(lat)
        assert lat.covolume * dual.covolume == 1

    def test_dual_contained_in_p_inverse_grid(self, f31_3):
        ctx = cached_field(31, 3, seed=0)
        basis = sample_basis(ctx, rng_for(1, 11))
        dual = polar_of(gamma_z(ctx, basis, ctx.decode(808)))
        assert dual.denom == 31  # Gamma_z^* inside p^{-1} Z^6

    def test_pairing_is_integral(self, f31_3):
        ctx = cached_field(31, 3, seed=0)
        rng = rng_for(1, 12)
        basis = sample_basis(ctx, rng)
        lat = gamma_z(ctx, basis, ctx.decode(2025))
        dual = polar_of(lat)
        lat_vecs = lat.vectors()
        dual_vecs = dual.vectors()
        for _ in range(100):
            cu = [int(v) for v in rng.integers(-3, 4, size=6)]
            cv = [int(v) for v in rng.integers(-3, 4, size=6)]
            u = [sum(c * row[j] for c, row in zip(cu, dual_vecs)) for j in range(6)]
            v = [sum(c * row[j] for c, row in zip(cv, lat_vecs)) for j in range(6)]
            pairing = sum(a * b for a, b in zip(u, v))
            assert pairing.denominator == 1


class TestLambda1Star:
    def test_z_one_enumerated_value(self, f31_3, id_basis_31_3):
        ctx = cached_field(31, 3, seed=0)
        box = Box(id_basis_31_3, (0, 0, 0), (3, 3, 3))
        lam, wit = lambda1_star(box, ctx.one())
        assert lam <= Fraction(2 * 3, 31)
        dual = polar_of(gamma_z(ctx, id_basis_31_3, ctx.one()))
        assert dual.contains([Fraction(w, dual.denom) for w in wit])

    def test_lower_bound_h1_over_p(self):
        ctx = cached_field(61, 3, seed=0)
        rng = rng_for(1, 13)
        for _ in range(8):
            box = random_key_box(ctx, rng)
            z = sample_z(ctx, rng)
            lam, _ = lambda1_star(box, z)
            if lam <= 1:
                assert lam >= Fraction(box.H[0], 61)

    def test_transference_product_small(self):
        ctx = cached_field(31, 3, seed=0)
        rng = rng_for(1, 14)
        worst = Fraction(0)
        for _ in range(6):
            box = random_key_box(ctx, rng)
            z = z_from_ratio_set(box, rng)
            lam_star, _ = lambda1_star(box, z)
            res = minima_for_z(box, z)
            worst = max(worst, lam_star * res.lambdas[-1])
        assert worst <= 4  # Banaszczyk-type product stays O(1) at desk scale


class TestClassifyZ:
    def test_recovery_and_classes(self):
        ctx = cached_field(31, 3, seed=0)
        rng = rng_for(1, 15)
        for _ in range(10):
            box = random_key_box(ctx, rng)
            z = z_from_ratio_set(box, rng)
            cls = classify_z(box, z)
            assert cls.recovered_z == z
            nb = box.normalize()
            weight = nb.H[1]
            assert Fraction(2) ** (cls.j - 1) <= weight * cls.lambdas[0] < Fraction(2) ** cls.j
            assert 1 <= cls.s <= 6
            if cls.j_star is not None:
                t = Fraction(31) * cls.lambda1_star / nb.H[0]
                assert Fraction(2) ** (cls.j_star - 1) <= t < Fraction(2) ** cls.j_star

    def test_s_equals_count_of_small_lambdas(self):
        ctx = cached_field(31, 2, seed=0)
        rng = rng_for(1, 16)
        box = random_key_box(ctx, rng)
        z = z_from_ratio_set(box, rng)
        cls = classify_z(box, z)
        assert cls.s == sum(1 for lam in cls.lambdas if lam <= 1)

    def test_rejects_prime_subfield_z(self, f31_3):
        ctx = cached_field(31, 3, seed=0)
        box = Box(BasisMatrix.identity(ctx), (0, 0, 0), (3, 3, 3))
        with pytest.raises(ValueError, match="outside"):
            classify_z(box, ctx.from_int(5))

    def test_rejects_z_outside_Z(self, f31_3):
        ctx = cached_field(31, 3, seed=0)
        box = Box(BasisMatrix.identity(ctx), (0, 0, 0), (1, 1, 1))
        # find z outside the ratio set of the tiny difference box
        from charbox import ratio_set

        zs = ratio_set(ctx, difference_box(box).element_indices())
        z = next(
            ctx.decode(i)
            for i in range(2, ctx.q)
            if ctx.decode(i) not in zs and not ctx.in_prime_subfield(ctx.decode(i))
        )
        with pytest.raises(ValueError, match="not in Z"):
            classify_z(box, z)


class TestGaugeBodies:
    def test_box_gauge_values(self):
        body = sup_box_body((2, 5))
        assert body.gauge((2, 5, -2, 0), 1) == 1
        assert body.gauge((1, 0, 0, 0), 1) == Fraction(1, 2)
        assert body.volume() == 2**4 * 100

    def test_polar_gauge_values(self):
        body = polar_body((2, 5))
        assert body.gauge((1, 0, -1, 0), 1) == 4
        assert body.gauge((0, 1, 0, 0), 31) == Fraction(5, 31)
        assert body.volume() == Fraction(2**4, math.factorial(4) * 100)

    def test_minima_scale_with_body(self):
        # lambda of c*D is lambda/c: doubling weights halves every lambda
        lat = IntLattice.integer_grid(4)
        res1 = successive_minima(lat, sup_box_body((1, 1)))
        res2 = successive_minima(lat, sup_box_body((2, 2)))
        assert [a / 2 for a in res1.lambdas] == list(res2.lambdas)


class TestPolarDyadicInjectivity:
    def test_same_class_distinct_witnesses(self):
        # two z in the same polar dyadic class never share a first-minimum
        # witness while lambda_1^* < H_1 (a shared witness would force the
        # scaled vector to vanish mod p, pushing its gauge up to H_1)
        from collections import defaultdict

        for p, n, edges in ((31, 3, (2, 3, 3)), (61, 2, (2, 5)), (31, 3, (1, 1, 2))):
            ctx = cached_field(p, n, seed=0)
            rng = rng_for(1, 21, p, n)
            basis = sample_basis(ctx, rng)
            box = Box(basis, (0,) * n, edges)
            nz = difference_box(box).element_indices()
            nz = nz[nz != 0]
            seen = defaultdict(dict)
            tested = 0
            while tested < 40:
                xi, yi = (int(v) for v in rng.integers(0, len(nz), size=2))
                z = ctx.div(ctx.decode(int(nz[yi])), ctx.decode(int(nz[xi])))
                if ctx.in_prime_subfield(z):
                    continue
                lam, wit = lambda1_star(box, z)
                if lam > 1 or lam >= box.H[0]:
                    continue
                t = Fraction(p) * lam / box.H[0]
                j = 0
                while t >= 1:
                    t /= 2
                    j += 1
                previous = seen[j].get(wit)
                assert previous is None or previous == z, (p, n, j, wit)
                seen[j][wit] = z
                tested += 1
