import math

import numpy as np
import pytest

from projlab.algebra import INFINITY, SingularPointError, exp_sl2
from projlab.families import (
    ChartOverflowError,
    EquatorSingularityError,
    KleinFamily,
    MobiusFull,
    MobiusOneParam,
    OutsideBallError,
    ProjectiveFull,
    ProjectiveOneParam,
    RotationFamily,
    SphereFamily,
    conjugate_family,
    conjugate_generator,
    family_dt_numeric,
    family_from_json,
    grassmann_chart,
    klein_closest_point,
    mobius_dt_identity,
    mobius_family_eval,
    mobius_identity_partials,
    projective_dt_identity,
    projective_family_eval,
    sphere_closest_point,
)
from projlab.presets import MOBIUS_GENERATORS, PROJECTIVE_GENERATORS

from conftest import random_gl3, random_sl2

O2 = MOBIUS_GENERATORS["o2"]
ROTATION = PROJECTIVE_GENERATORS["rotation"]


def klein_distance(p, q):
    # hyperbolic distance in the ball model with straight geodesics through 0;
    # oracle-only, the projection itself never uses it
    p = np.asarray(p, float)
    q = np.asarray(q, float)
    num = 1.0 - p @ q
    den = math.sqrt((1.0 - p @ p) * (1.0 - q @ q))
    return math.acosh(max(1.0, num / den))


class TestMobiusFamily:
    def test_identity_parameter_is_real_part(self):
        for A in MOBIUS_GENERATORS.values():
            assert abs(mobius_family_eval(A, 0.0, 1 + 2j) - 1.0) < 1e-12

    def test_quarter_turn(self):
        v = mobius_family_eval(O2, math.pi / 2, 1 + 0j)
        assert abs(v - 0.0) < 1e-12

    def test_translation_flow(self):
        v = mobius_family_eval(MOBIUS_GENERATORS["translation"], 5.0, 2 + 3j)
        assert abs(v - 7.0) < 1e-12

    def test_singular_fiber_raises(self):
        # the elliptic flow sends i*cot(t/2) to infinity
        A = MOBIUS_GENERATORS["elliptic"]
        pole = mobius_apply_pole(A, 1.0)
        with pytest.raises(SingularPointError):
            mobius_family_eval(A, 1.0, pole)


def mobius_apply_pole(A, t):
    m = exp_sl2(A, t).matrix
    return complex(-m[1, 1] / m[1, 0])


class TestMobiusDtIdentity:
    def test_rotation_generator(self):
        assert abs(mobius_dt_identity(O2, 1 + 2j) - (-2.0)) < 1e-14

    def test_elliptic_generator_is_xy(self, rng):
        A = MOBIUS_GENERATORS["elliptic"]
        for _ in range(20):
            x, y = rng.standard_normal(2)
            assert abs(mobius_dt_identity(A, complex(x, y)) - x * y) < 1e-12
        assert abs(mobius_dt_identity(A, 0.7j)) < 1e-14

    def test_translation_generator_constant(self, rng):
        A = MOBIUS_GENERATORS["translation"]
        for _ in range(10):
            z = complex(*rng.standard_normal(2))
            assert mobius_dt_identity(A, z) == 1.0

    def test_infinity_rejected(self):
        with pytest.raises(SingularPointError):
            mobius_dt_identity(O2, INFINITY)


class TestIdentityPartials:
    def test_at_origin(self):
        assert np.allclose(mobius_identity_partials(0j), [0, 0, 1, 0, 0, 0])

    def test_at_one_plus_i(self):
        assert np.allclose(mobius_identity_partials(1 + 1j), [2, -2, 1, 0, 0, 2])

    def test_at_i(self):
        assert np.allclose(mobius_identity_partials(1j), [0, -2, 1, 0, 1, 0])

    def test_matches_one_param_slices(self, rng):
        from projlab.families import SL2_BASIS

        for _ in range(10):
            z = complex(*rng.standard_normal(2))
            parts = mobius_identity_partials(z)
            for j, E in enumerate(SL2_BASIS):
                assert abs(parts[j] - mobius_dt_identity(E, z)) < 1e-12


class TestProjectiveFamily:
    def test_identity_parameter(self):
        from projlab.algebra import HomPoint2

        out = projective_family_eval(ROTATION, 0.0, HomPoint2(3, 4, 2))
        assert abs(out.affine() - 1.5) < 1e-12

    def test_quarter_turn(self):
        from projlab.algebra import HomPoint2

        out = projective_family_eval(ROTATION, math.pi / 2, HomPoint2(1, 0, 1))
        assert abs(out.affine() - 0.0) < 1e-12

    def test_shear_flow(self):
        from projlab.algebra import HomPoint2

        out = projective_family_eval(PROJECTIVE_GENERATORS["shear"], 2.0, HomPoint2(1, 3, 1))
        assert abs(out.affine() - (-5.0)) < 1e-12


class TestProjectiveDtIdentity:
    def test_rotation_is_minus_y(self, rng):
        for _ in range(20):
            x, y = rng.standard_normal(2)
            assert abs(projective_dt_identity(ROTATION, (x, y)) - (-y)) < 1e-12

    def test_point_source_generator(self, rng):
        A = PROJECTIVE_GENERATORS["pointsource-printed"]
        for _ in range(20):
            x, y = rng.standard_normal(2)
            assert abs(projective_dt_identity(A, (x, y)) - (-1 - x * x)) < 1e-12

    def test_zero_generator(self):
        assert projective_dt_identity(np.zeros((3, 3)), (0.3, -0.8)) == 0.0


class TestNumericDerivatives:
    def test_mobius_example(self):
        fam = MobiusOneParam(O2)
        d = family_dt_numeric(fam, 0.0, 1 + 2j, h=1e-4)
        assert abs(d - (-2.0)) < 1e-6

    def test_projective_example(self):
        fam = ProjectiveOneParam(ROTATION)
        d = family_dt_numeric(fam, 0.0, np.array([0.5, 0.25]), h=1e-4)
        assert abs(d - (-0.25)) < 1e-6

    def test_translation_exact(self, rng):
        fam = MobiusOneParam(MOBIUS_GENERATORS["translation"])
        z = complex(*rng.standard_normal(2))
        assert abs(family_dt_numeric(fam, 0.3, z, h=1e-4) - 1.0) < 1e-12

    # generator scale only reparametrizes the subgroup, so it is normalized to
    # keep the checking stencil's own truncation below the stated tolerance
    def test_analytic_vs_numeric_mobius(self, rng):
        for _ in range(100):
            A = random_sl2(rng, norm=rng.uniform(0.01, 0.15))
            z = complex(*rng.uniform(-10, 10, 2))
            fam = MobiusOneParam(A)
            analytic = fam.dt_identity(z)
            numeric = family_dt_numeric(fam, 0.0, z, h=1e-4)
            assert abs(analytic - numeric) < 1e-6 * (1 + abs(analytic))

    def test_analytic_vs_numeric_projective(self, rng):
        for _ in range(100):
            A = random_gl3(rng, norm=rng.uniform(0.01, 0.15))
            p = np.array(rng.uniform(-10, 10, 2))
            fam = ProjectiveOneParam(A)
            analytic = fam.dt_identity(p)
            numeric = family_dt_numeric(fam, 0.0, p, h=1e-4)
            assert abs(analytic - numeric) < 1e-6 * (1 + abs(analytic))

    def test_full_families_partials(self, rng):
        mf = MobiusFull()
        pf = ProjectiveFull()
        for _ in range(5):
            z = complex(*rng.uniform(-2, 2, 2))
            assert np.allclose(
                mf.dt_identity(z), family_dt_numeric(mf, np.zeros(6), z, h=1e-4), atol=1e-6
            )
            p = np.array(rng.uniform(-2, 2, 2))
            assert np.allclose(
                pf.dt_identity(p), family_dt_numeric(pf, np.zeros(9), p, h=1e-4), atol=1e-6
            )


class TestGroupActionIdentity:
    def test_mobius(self, rng):
        for _ in range(20):
            A = random_sl2(rng, norm=1.0)
            fam = MobiusOneParam(A)
            t = rng.uniform(-1.5, 1.5)
            z = complex(*rng.standard_normal(2))
            moved = fam.act(t, z)
            if moved.is_infinity:
                continue
            assert abs(fam.eval(t, z) - fam.eval(0.0, moved)) < 1e-9

    def test_projective(self, rng):
        from projlab.algebra import HomPoint2

        for _ in range(20):
            A = random_gl3(rng, norm=1.0)
            fam = ProjectiveOneParam(A)
            t = rng.uniform(-1.5, 1.5)
            p = HomPoint2.from_affine(*rng.standard_normal(2))
            moved = fam.act(t, p)
            try:
                lhs = fam.eval(t, p)
                rhs = fam.eval(0.0, moved)
            except SingularPointError:
                continue
            assert abs(lhs - rhs) < 1e-9

    def test_rotation_and_klein(self, rng):
        for fam in (RotationFamily(2, 1), RotationFamily(3, 2), KleinFamily(2, 1)):
            lam = rng.uniform(-0.5, 0.5, fam.param_dim)
            q = rng.uniform(-0.4, 0.4, fam.n)
            lhs = np.atleast_1d(fam.eval(lam, q))
            rhs = np.atleast_1d(fam.eval(np.zeros(fam.param_dim), fam.act(lam, q)))
            assert np.allclose(lhs, rhs, atol=1e-9)

    def test_full_families(self, rng):
        mf = MobiusFull()
        for _ in range(10):
            lam = rng.uniform(-0.3, 0.3, 6)
            z = complex(*rng.standard_normal(2))
            moved = mf.act(lam, z)
            if moved.is_infinity:
                continue
            assert abs(mf.eval(lam, z) - mf.eval(np.zeros(6), moved)) < 1e-9
        pf = ProjectiveFull()
        for _ in range(10):
            lam = rng.uniform(-0.3, 0.3, 9)
            p = np.array(rng.standard_normal(2))
            moved = pf.act(lam, p)
            try:
                lhs = pf.eval(lam, p)
                rhs = pf.eval(np.zeros(9), moved)
            except SingularPointError:
                continue
            assert abs(lhs - rhs) < 1e-9

    def test_sphere_eval_matches_closest_point_chart(self, rng):
        fam = SphereFamily(3, 1)
        for _ in range(10):
            q = rng.standard_normal(4)
            q /= np.linalg.norm(q)
            if abs(q[-1]) < 0.1:
                continue
            theta = rng.uniform(-0.5, 0.5, fam.param_dim)
            val = fam.eval(theta, q)
            cp = fam.closest_point(theta, q)
            u = fam._rotation(theta).T @ cp
            assert abs(val - u[0] / u[-1]) < 1e-9


class TestSphereClosestPoint:
    def test_fixed_points(self, rng):
        V = np.eye(3)[:, [0, 2]]
        q = np.array([0.6, 0.0, 0.8])
        assert np.allclose(sphere_closest_point(q, V), q, atol=1e-12)

    def test_orthogonal_is_singular(self):
        with pytest.raises(EquatorSingularityError):
            sphere_closest_point(np.array([0.0, 1.0, 0.0]), np.eye(3)[:, [0, 2]])

    def test_reference_value(self):
        q = np.array([1 / math.sqrt(2), 0.5, 0.5])
        out = sphere_closest_point(q, np.eye(3)[:, [0, 2]])
        assert np.allclose(out, [math.sqrt(2 / 3), 0.0, 1 / math.sqrt(3)], atol=1e-12)

    def test_argmin_against_sampled_oracle(self, rng):
        V = np.eye(3)[:, [0, 2]]
        q = np.array([1 / math.sqrt(2), 0.5, 0.5])
        out = sphere_closest_point(q, V)
        ang = rng.uniform(0, 2 * math.pi, 10000)
        cand = np.column_stack([np.cos(ang), np.zeros_like(ang), np.sin(ang)])
        best = np.max(cand @ q)  # maximal cosine = minimal great-circle distance
        assert out @ q >= best - 1e-9

    def test_output_in_subspace_unit_idempotent(self, rng):
        for _ in range(20):
            q = rng.standard_normal(4)
            q /= np.linalg.norm(q)
            W = np.linalg.qr(rng.standard_normal((4, 2)))[0]
            try:
                c = sphere_closest_point(q, W)
            except EquatorSingularityError:
                continue
            assert abs(np.linalg.norm(c) - 1) < 1e-12
            assert np.linalg.norm(c - W @ (W.T @ c)) < 1e-12
            assert np.allclose(sphere_closest_point(c, W), c, atol=1e-9)


class TestKleinClosestPoint:
    def test_projection_values(self):
        W = np.eye(2)[:, [0]]
        assert np.allclose(klein_closest_point(np.array([0.3, 0.4]), W), [0.3, 0.0])
        assert np.allclose(klein_closest_point(np.array([0.0, 0.9]), W), [0.0, 0.0])

    def test_fixed_points(self):
        W = np.eye(2)[:, [0]]
        assert np.allclose(klein_closest_point(np.array([0.5, 0.0]), W), [0.5, 0.0])

    def test_outside_ball_rejected(self):
        with pytest.raises(OutsideBallError):
            klein_closest_point(np.array([1.0, 0.3]), np.eye(2)[:, [0]])

    def test_hyperbolic_argmin_on_grid(self):
        W = np.eye(2)[:, [0]]
        q = np.array([0.0, 0.9])
        ours = klein_closest_point(q, W)
        grid = np.linspace(-0.999, 0.999, 10000)
        dists = [klein_distance(np.array([g, 0.0]), q) for g in grid]
        assert klein_distance(ours, q) <= min(dists) + 1e-12

    def test_inside_ball_and_idempotent(self, rng):
        for _ in range(20):
            q = rng.uniform(-0.6, 0.6, 3)
            W = np.linalg.qr(rng.standard_normal((3, 2)))[0]
            p = klein_closest_point(q, W)
            assert np.linalg.norm(p) < 1.0
            assert np.allclose(klein_closest_point(p, W), p, atol=1e-12)


class TestGrassmannChart:
    def test_zero_angles(self):
        basis, ident = grassmann_chart(3, 1, [0.0, 0.0])
        assert np.allclose(basis.ravel(), [1, 0, 0])
        assert np.allclose(ident @ basis, np.eye(1))

    def test_planar_angle(self):
        basis, _ = grassmann_chart(2, 1, [math.pi / 4])
        assert np.allclose(basis.ravel(), [math.cos(math.pi / 4), math.sin(math.pi / 4)])

    def test_second_pair_rotation(self):
        basis, _ = grassmann_chart(3, 1, [0.0, math.pi / 6])
        assert np.allclose(basis.ravel(), [math.cos(math.pi / 6), 0.0, math.sin(math.pi / 6)])

    def test_ident_inverts_basis(self, rng):
        for n, m in ((3, 1), (4, 2), (4, 3)):
            theta = rng.uniform(-0.4, 0.4, (n - m) * m)
            basis, ident = grassmann_chart(n, m, theta)
            assert np.allclose(ident @ basis, np.eye(m), atol=1e-12)

    def test_chart_radius(self):
        with pytest.raises(ChartOverflowError):
            grassmann_chart(2, 1, [math.pi / 2])


class TestConjugation:
    def test_identity_conjugator(self):
        fam = MobiusOneParam(O2)
        out = conjugate_family(fam, np.eye(2, dtype=complex))
        assert np.allclose(out.generator, fam.generator)

    def test_rotation_to_point_source(self):
        N = np.array([[1.0, 0.0, 0.0], [0.0, 0.0, -1.0], [0.0, 1.0, 0.0]])
        out = conjugate_generator(ROTATION, N)
        assert np.allclose(out, [[0, 0, -1], [0, 0, 0], [1, 0, 0]], atol=1e-12)

    def test_diagonal_to_elliptic(self):
        M = np.array([[1, -1], [1, 1]], dtype=complex)
        out = conjugate_generator(np.diag([0.5j, -0.5j]), M)
        assert np.allclose(out, [[0, 0.5j], [0.5j, 0]], atol=1e-12)

    def test_conjugated_family_evaluates(self, rng):
        M = np.array([[1, -1], [1, 1]], dtype=complex) / math.sqrt(2)
        fam = conjugate_family(MobiusOneParam(np.diag([0.5j, -0.5j])), M)
        assert abs(fam.eval(0.0, 1 + 1j) - 1.0) < 1e-12


class TestSphereFamilyConjugacy:
    def test_projectivization_intertwines(self, rng):
        for n, m in ((2, 1), (3, 1), (3, 2)):
            fam = SphereFamily(n, m)
            for _ in range(50):
                q = rng.standard_normal(n + 1)
                q /= np.linalg.norm(q)
                if abs(q[-1]) < 0.05:
                    continue
                theta = rng.uniform(-0.6, 0.6, fam.param_dim)
                cp = fam.closest_point(theta, q)
                if abs(cp[-1]) < 1e-9:
                    continue
                fq = q[:n] / q[-1]
                fcp = cp[:n] / cp[-1]
                W = fam._rotation(theta)[:n, :m]
                assert np.allclose(fcp, W @ (W.T @ fq), atol=1e-9)


class TestSerialization:
    def test_round_trip(self):
        fams = [
            MobiusOneParam(O2),
            ProjectiveOneParam(ROTATION),
            MobiusFull(),
            ProjectiveFull(),
            RotationFamily(3, 2),
            KleinFamily(2, 1),
            SphereFamily(3, 1),
        ]
        for fam in fams:
            back = family_from_json(fam.to_json_dict())
            assert back.family_id == fam.family_id
            assert back.param_dim == fam.param_dim
