import math

import numpy as np
import pytest

from projlab.algebra import (
    DimensionMismatchError,
    ExtendedComplex,
    HomPoint1,
    HomPoint2,
    INFINITY,
    INFINITY_X,
    INFINITY_Y,
    MobiusMap,
    ProjectiveMap,
    SingularPointError,
    chordal_dist,
    exp_gl3,
    exp_sl2,
    expm,
    mobius_apply,
    pi_standard,
    proj_apply,
    rho_gram,
)

from conftest import cap_product, random_gl3, random_sl2, taylor_exp


class TestExpSl2:
    def test_zero_generator_gives_identity(self):
        m = exp_sl2(np.zeros((2, 2), complex), 1.7).matrix
        assert np.allclose(m, np.eye(2), atol=1e-15)

    def test_rotation_generator_quarter_turn(self):
        A = np.array([[0.5j, 0], [0, -0.5j]])
        m = exp_sl2(A, math.pi).matrix
        assert np.max(np.abs(m - np.diag([1j, -1j]))) < 1e-12

    def test_nilpotent_truncates(self):
        A = np.array([[0, 1], [0, 0]], dtype=complex)
        m = exp_sl2(A, 3.0).matrix
        assert np.max(np.abs(m - np.array([[1, 3], [0, 1]]))) < 1e-14

    def test_against_series_oracle(self, rng):
        for _ in range(50):
            A = random_sl2(rng)
            t = cap_product(A, rng.uniform(-2, 2))
            err = np.max(np.abs(exp_sl2(A, t).matrix - taylor_exp(A * t)))
            assert err < 1e-10

    def test_small_angle_branch_matches_oracle(self, rng):
        # exercise both sides of the series switch
        A = random_sl2(rng, norm=1.0)
        for t in (1e-7, 5e-5, 2e-4, 1e-3):
            err = np.max(np.abs(exp_sl2(A, t).matrix - taylor_exp(A * t)))
            assert err < 1e-14

    def test_group_law(self, rng):
        for _ in range(30):
            A = random_sl2(rng)
            s = rng.uniform(-2, 2)
            t = rng.uniform(-2, 2)
            lhs = exp_sl2(A, s + t).matrix
            rhs = exp_sl2(A, s).matrix @ exp_sl2(A, t).matrix
            assert np.max(np.abs(lhs - rhs)) < 1e-9

    def test_determinant_one(self, rng):
        for _ in range(20):
            A = random_sl2(rng)
            m = exp_sl2(A, rng.uniform(-2, 2)).matrix
            assert abs(m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0] - 1) < 1e-9


class TestExpGl3:
    def test_rotation_flow(self):
        A = np.array([[0.0, -1.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, 0.0]])
        for t in (-2.0, 0.3, 1.0):
            expect = np.array(
                [[math.cos(t), -math.sin(t), 0], [math.sin(t), math.cos(t), 0], [0, 0, 1]]
            )
            assert np.max(np.abs(exp_gl3(A, t).matrix - expect)) < 1e-12

    def test_zero_generator(self):
        assert np.allclose(exp_gl3(np.zeros((3, 3)), 5.0).matrix, np.eye(3))

    def test_diagonal_flow(self):
        m = exp_gl3(np.diag([2.0, 3.0, 0.0]), 1.0).matrix
        assert np.max(np.abs(m - np.diag([math.e**2, math.e**3, 1.0]))) < 1e-10

    def test_against_series_oracle(self, rng):
        for _ in range(50):
            A = random_gl3(rng)
            t = cap_product(A, rng.uniform(-2, 2))
            err = np.max(np.abs(expm(A * t) - taylor_exp(A * t)))
            assert err < 1e-10

    def test_group_law(self, rng):
        for _ in range(30):
            A = random_gl3(rng)
            s = rng.uniform(-2, 2)
            t = rng.uniform(-2, 2)
            lhs = exp_gl3(A, s + t).matrix
            rhs = exp_gl3(A, s).matrix @ exp_gl3(A, t).matrix
            assert np.max(np.abs(lhs - rhs)) < 1e-9


class TestMobiusAction:
    def test_identity(self):
        g = MobiusMap.identity()
        assert mobius_apply(g, 2 + 3j).z == 2 + 3j

    def test_inversion_fixes_i(self):
        g = MobiusMap([[0, 1], [-1, 0]])
        assert abs(mobius_apply(g, 1j).z - 1j) < 1e-15

    def test_infinity_bookkeeping(self):
        g = MobiusMap([[0, 1], [-1, 0]])
        assert abs(mobius_apply(g, INFINITY).z - 0) < 1e-15
        assert mobius_apply(g, 0j).is_infinity
        pole = mobius_apply(MobiusMap([[1, 0], [1, 1]]), -1 + 0j)
        assert pole.is_infinity

    def test_sign_flip_invariance(self, rng):
        for _ in range(20):
            m = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
            if abs(np.linalg.det(m)) < 0.1:
                continue
            z = complex(rng.standard_normal(), rng.standard_normal())
            a = mobius_apply(MobiusMap(m), z)
            b = mobius_apply(MobiusMap(-m), z)
            assert chordal_dist(a, b) < 1e-12

    def test_group_law_chordal(self, rng):
        for _ in range(50):
            g = MobiusMap(rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2)))
            h = MobiusMap(rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2)))
            z = ExtendedComplex(complex(rng.standard_normal(), rng.standard_normal()))
            lhs = mobius_apply(g.compose(h), z)
            rhs = mobius_apply(g, mobius_apply(h, z))
            assert chordal_dist(lhs, rhs) < 1e-9


class TestProjectiveAction:
    def test_identity(self):
        p = HomPoint2(1, 2, 1)
        assert proj_apply(ProjectiveMap.identity(), p) == p

    def test_preserves_source(self):
        M = ProjectiveMap([[0, 0, -1], [0, 1, 0], [1, 0, 0]])
        assert proj_apply(M, INFINITY_Y) == INFINITY_Y

    def test_sends_origin_to_source(self):
        N = ProjectiveMap([[1, 0, 0], [0, 0, -1], [0, 1, 0]])
        assert proj_apply(N, HomPoint2(0, 0, 1)) == INFINITY_Y

    def test_scaling_invariance(self, rng):
        for _ in range(20):
            m = rng.standard_normal((3, 3))
            if abs(np.linalg.det(m)) < 0.05:
                continue
            v = rng.standard_normal(3)
            if np.linalg.norm(v) < 0.1:
                continue
            g = ProjectiveMap(m)
            assert proj_apply(g, HomPoint2(v)) == proj_apply(g, HomPoint2(3.7 * v))


class TestPiStandard:
    def test_affine_value(self):
        out = pi_standard(HomPoint2(3, 4, 2))
        assert abs(out.affine() - 1.5) < 1e-12

    def test_infinite_points_map_to_infinity(self):
        assert pi_standard(HomPoint2(5, 7, 0)) == INFINITY_X

    def test_source_is_excluded(self):
        with pytest.raises(SingularPointError):
            pi_standard(INFINITY_Y)

    def test_restricted_to_plane_is_first_coordinate(self, rng):
        for _ in range(10):
            x, y = rng.standard_normal(2)
            assert abs(pi_standard(HomPoint2.from_affine(x, y)).affine() - x) < 1e-12


class TestChordal:
    def test_zero_iff_equal(self):
        assert chordal_dist(1 + 1j, 1 + 1j) == 0.0
        assert chordal_dist(INFINITY, INFINITY) == 0.0

    def test_origin_to_infinity_antipodal(self):
        assert abs(chordal_dist(0j, INFINITY) - 2.0) < 1e-15

    def test_orthogonal_hom_points(self):
        assert abs(chordal_dist(HomPoint2(1, 0, 0), HomPoint2(0, 1, 0)) - 1.0) < 1e-15

    def test_symmetry(self, rng):
        for _ in range(20):
            v = complex(rng.standard_normal(), rng.standard_normal())
            w = complex(rng.standard_normal(), rng.standard_normal())
            assert chordal_dist(v, w) == chordal_dist(w, v)


class TestRhoGram:
    def test_identity(self):
        assert abs(rho_gram(np.eye(2)) - 1.0) < 1e-15

    def test_block_value(self):
        assert abs(rho_gram(np.array([[2.0, 3.0]])) - math.sqrt(13)) < 1e-12

    def test_degenerate_row(self):
        assert rho_gram(np.array([[0.0, 0.0]])) == 0.0

    def test_shape_check(self):
        with pytest.raises(DimensionMismatchError):
            rho_gram(np.ones((3, 2)))

    def test_block_extension_monotone(self, rng):
        # appending columns never shrinks the Gram volume
        for _ in range(50):
            m = rng.integers(1, 4)
            k = rng.integers(m, 5)
            extra = rng.integers(1, 4)
            A = rng.standard_normal((m, k))
            B = rng.standard_normal((m, extra))
            assert rho_gram(np.hstack([A, B])) >= rho_gram(A) - 1e-12


class TestHomPoints:
    def test_canonicalization_idempotent(self, rng):
        for _ in range(50):
            v = rng.standard_normal(3)
            if np.linalg.norm(v) < 0.1:
                continue
            p = HomPoint2(v)
            q = HomPoint2(p.coords)
            assert np.array_equal(p.coords, q.coords)

    def test_proportional_equality(self, rng):
        for _ in range(50):
            v = rng.standard_normal(3)
            if np.linalg.norm(v) < 0.1:
                continue
            s = rng.uniform(0.1, 10) * rng.choice([-1.0, 1.0])
            assert HomPoint2(v) == HomPoint2(s * v)

    def test_unit_norm_invariant(self, rng):
        for _ in range(20):
            v = rng.standard_normal(3) * 100
            if np.linalg.norm(v) < 1:
                continue
            assert abs(np.linalg.norm(HomPoint2(v).coords) - 1.0) < 1e-12

    def test_all_zero_rejected(self):
        with pytest.raises(ValueError):
            HomPoint2(0.0, 0.0, 0.0)

    def test_hompoint1(self):
        assert HomPoint1(3, 2) == HomPoint1(-6, -4)
        assert abs(HomPoint1(3, 2).affine() - 1.5) < 1e-12
        assert HomPoint1(5, 0).is_infinite

    def test_finite_infinite_never_equal(self):
        assert ExtendedComplex(3.0) != INFINITY
        assert not (INFINITY == ExtendedComplex(0.0))
