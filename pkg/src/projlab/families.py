"""Projection families induced by group actions.

Each family evaluates a one- or multi-parameter bundle of projections
Pi(lambda, p) obtained by moving the point with a group element and then
applying a fixed projection: the real part on the extended complex plane, the
(x:z) coordinate projection on the projective plane, or closest-point
projection onto rotating subspaces in Euclidean, spherical, and Klein-model
hyperbolic geometry.

Families share a uniform contract: ``param_dim``, ``target_dim``,
``eval``/``eval_many``, ``in_domain``, ``act`` (the underlying group motion),
and ``dt_identity`` (analytic parameter gradient at the identity).
"""

from __future__ import annotations

import math

import numpy as np

from .algebra import (
    DENOM_TOL,
    ExtendedComplex,
    HomPoint2,
    MobiusMap,
    ProjectiveMap,
    SingularPointError,
    as_extended,
    check_gl3_generator,
    check_sl2_generator,
    exp_gl3,
    exp_sl2,
    expm,
    pi_standard,
    proj_apply,
)


class EquatorSingularityError(SingularPointError):
    """Sphere point orthogonal to the target subspace: closest point undefined."""


class OutsideBallError(ValueError):
    """Klein-model points must lie strictly inside the unit ball."""


class ChartOverflowError(ValueError):
    """Rotation-chart coordinates outside the chart's validity radius."""


# Real basis of the traceless 2x2 complex matrices, frozen interface order.
SL2_BASIS = [
    np.array([[1, 0], [0, -1]], dtype=complex),
    np.array([[1j, 0], [0, -1j]], dtype=complex),
    np.array([[0, 1], [0, 0]], dtype=complex),
    np.array([[0, 1j], [0, 0]], dtype=complex),
    np.array([[0, 0], [1, 0]], dtype=complex),
    np.array([[0, 0], [1j, 0]], dtype=complex),
]

# Basis e_ij of the 3x3 real matrices, row-major, frozen interface order.
GL3_BASIS = [np.outer(np.eye(3)[i], np.eye(3)[j]) for i in range(3) for j in range(3)]


def mobius_family_eval(A, t, z):
    """Evaluate Re(exp(A t)(z)); raises SingularPointError on the pole fiber."""
    g = exp_sl2(A, t)
    image = g.apply(as_extended(z))
    if image.is_infinity:
        raise SingularPointError("point maps to infinity at this parameter")
    return image.z.real


def mobius_dt_identity(A, z):
    """Parameter derivative of the real-part family at the identity.

    For a traceless generator A = [[a11, a12], [a21, -a11]] and finite z the
    derivative is Re(a12 + 2 a11 z - a21 z^2).
    """
    A = check_sl2_generator(A, allow_zero=True)
    z = as_extended(z)
    if z.is_infinity:
        raise SingularPointError("identity derivative needs a finite point")
    zz = z.z
    return (A[0, 1] + 2.0 * A[0, 0] * zz - A[1, 0] * zz * zz).real


def mobius_identity_partials(z):
    """Gradient of the full six-parameter Mobius family at the identity.

    Basis order is SL2_BASIS; for z = x + iy the value is
    (2x, -2y, 1, 0, -Re(z^2), Im(z^2)).
    """
    z = as_extended(z)
    if z.is_infinity:
        raise SingularPointError("identity partials need a finite point")
    zz = z.z
    z2 = zz * zz
    return np.array([2 * zz.real, -2 * zz.imag, 1.0, 0.0, -z2.real, z2.imag])


def projective_family_eval(A, t, p):
    """Evaluate pi(exp(A t)(p)) on the projective plane, as a projective-line point."""
    g = exp_gl3(A, t)
    return pi_standard(proj_apply(g, p))


def projective_dt_identity(A, point):
    """Parameter derivative of the projective family at the identity.

    At a finite affine point (x, y):
    a11 x + a12 y + a13 - x (a31 x + a32 y + a33).
    """
    A = check_gl3_generator(A, allow_zero=True)
    x, y = _affine_pair(point)
    return A[0, 0] * x + A[0, 1] * y + A[0, 2] - x * (A[2, 0] * x + A[2, 1] * y + A[2, 2])


def projective_identity_partials(point):
    """Gradient of the nine-parameter projective family at the identity,
    in GL3_BASIS (row-major e_ij) order."""
    x, y = _affine_pair(point)
    return np.array([x, y, 1.0, 0.0, 0.0, 0.0, -x * x, -x * y, -x])


def _affine_pair(point):
    if isinstance(point, HomPoint2):
        return point.affine()
    if isinstance(point, ExtendedComplex):
        z = point.z
        return (z.real, z.imag)
    if isinstance(point, complex):
        return (point.real, point.imag)
    arr = np.asarray(point, dtype=float)
    if arr.shape != (2,):
        raise ValueError("expected an affine planar point")
    return (float(arr[0]), float(arr[1]))


# ---------------------------------------------------------------------------
# rotation charts and curved-space closest points


def rotation_generator(n, i, j):
    """Skew generator of the rotation turning e_i toward e_j in R^n."""
    J = np.zeros((n, n))
    J[j, i] = 1.0
    J[i, j] = -1.0
    return J


def grassmann_chart(n, m, theta):
    """Chart of the m-plane manifold in R^n by basic rotations.

    theta has one entry per pair (i, j) with i <= m < j (row-major in i, then
    j).  Returns (basis, ident): the columns of ``basis`` span the rotated
    subspace and ``ident`` maps it back to R^m (ident @ basis = identity).
    """
    theta = np.asarray(theta, dtype=float).ravel()
    if not (1 <= m < n):
        raise ValueError("need 1 <= m < n")
    if theta.shape != ((n - m) * m,):
        raise ValueError("chart needs (n-m)*m angles")
    if np.linalg.norm(theta) >= math.pi / 2:
        raise ChartOverflowError("chart coordinates outside validity radius pi/2")
    K = np.zeros((n, n))
    idx = 0
    for i in range(m):
        for j in range(m, n):
            K += theta[idx] * rotation_generator(n, i, j)
            idx += 1
    R = expm(K)
    return R[:, :m], R[:, :m].T


def sphere_closest_point(q, V):
    """Closest point on the geodesic subspace V (intersected with the sphere).

    V is given by a basis (columns).  The result is the normalized orthogonal
    projection of q onto V; when q is orthogonal to V the closest point is
    undefined (the excluded equator configuration).
    """
    q = np.asarray(q, dtype=float)
    V = np.asarray(V, dtype=float)
    if V.ndim == 1:
        V = V[:, None]
    Q, _ = np.linalg.qr(V)
    proj = Q @ (Q.T @ q)
    norm = np.linalg.norm(proj)
    if norm < DENOM_TOL:
        raise EquatorSingularityError("point is orthogonal to the subspace")
    return proj / norm


def klein_closest_point(q, W):
    """Closest point, in the Klein-model hyperbolic metric, on a linear
    subspace through the origin: plain Euclidean orthogonal projection."""
    q = np.asarray(q, dtype=float)
    if np.linalg.norm(q) >= 1.0:
        raise OutsideBallError("Klein-model points lie strictly inside the unit ball")
    W = np.asarray(W, dtype=float)
    if W.ndim == 1:
        W = W[:, None]
    Q, _ = np.linalg.qr(W)
    return Q @ (Q.T @ q)


# ---------------------------------------------------------------------------
# the family contract


class ProjectionFamily:
    """Common contract for parameter-dependent projection bundles."""

    param_dim = 1
    target_dim = 1
    family_id = "family"

    def eval(self, lam, p):
        raise NotImplementedError

    def in_domain(self, lam, p):
        try:
            self.eval(lam, p)
            return True
        except (SingularPointError, OutsideBallError):
            return False

    def act(self, lam, p):
        raise NotImplementedError

    def dt_identity(self, p):
        raise NotImplementedError

    # scan plumbing: families living on a planar chart expose conversions so
    # grid scans can work with raw (x, y) arrays.
    def point_from_xy(self, x, y):
        raise NotImplementedError

    def eval_many(self, lam, points):
        """Vectorized evaluation over an (N, 2) array of chart points.

        Returns (values, finite_mask); entries with False mask fell into the
        excluded fiber and carry NaN.
        """
        pts = np.asarray(points, dtype=float)
        values = np.full(pts.shape[0], np.nan)
        mask = np.zeros(pts.shape[0], dtype=bool)
        lam = np.atleast_1d(np.asarray(lam, dtype=float))
        for i in range(pts.shape[0]):
            try:
                values[i] = self.eval(lam if self.param_dim > 1 else float(lam[0]),
                                      self.point_from_xy(pts[i, 0], pts[i, 1]))
                mask[i] = True
            except (SingularPointError, OutsideBallError):
                pass
        return values, mask

    def dt_identity_many(self, points):
        pts = np.asarray(points, dtype=float)
        out = np.empty((pts.shape[0], self.param_dim))
        for i in range(pts.shape[0]):
            out[i] = np.atleast_1d(self.dt_identity(self.point_from_xy(pts[i, 0], pts[i, 1])))
        return out

    def to_json_dict(self):
        raise NotImplementedError


def _mobius_eval_grid(matrix, points):
    z = _as_complex_array(points)
    num = matrix[0, 0] * z + matrix[0, 1]
    den = matrix[1, 0] * z + matrix[1, 1]
    mask = np.abs(den) >= DENOM_TOL * np.maximum(1.0, np.abs(num))
    values = np.full(z.shape, np.nan)
    values[mask] = (num[mask] / den[mask]).real
    return values, mask


def _projective_eval_grid(matrix, points):
    pts = np.asarray(points, dtype=float)
    hom = np.column_stack([pts, np.ones(pts.shape[0])]) @ matrix.T
    num, den = hom[:, 0], hom[:, 2]
    mask = np.abs(den) >= DENOM_TOL * np.maximum(1.0, np.abs(num))
    values = np.full(pts.shape[0], np.nan)
    values[mask] = num[mask] / den[mask]
    return values, mask


class MobiusOneParam(ProjectionFamily):
    """One-parameter Mobius flow followed by the real-part projection."""

    param_dim = 1
    target_dim = 1

    def __init__(self, A):
        self.generator = check_sl2_generator(A, allow_zero=True)
        flat = ",".join("%.12g" % v for c in self.generator.ravel() for v in (c.real, c.imag))
        self.family_id = "mobius[%s]" % flat

    def eval(self, lam, p):
        return mobius_family_eval(self.generator, float(lam), p)

    def act(self, lam, p):
        return exp_sl2(self.generator, float(lam)).apply(as_extended(p))

    def in_domain(self, lam, p):
        g = exp_sl2(self.generator, float(lam))
        return not g.apply(as_extended(p)).is_infinity

    def dt_identity(self, p):
        return mobius_dt_identity(self.generator, p)

    def point_from_xy(self, x, y):
        return complex(x, y)

    def eval_many(self, lam, points):
        return _mobius_eval_grid(exp_sl2(self.generator, float(lam)).matrix, points)

    def dt_identity_many(self, points):
        z = _as_complex_array(points)
        A = self.generator
        return (A[0, 1] + 2.0 * A[0, 0] * z - A[1, 0] * z * z).real[:, None]

    def to_json_dict(self):
        from .serialize import complex_matrix_to_json

        return {"kind": "mobius-one-param", "generator": complex_matrix_to_json(self.generator)}


class MobiusFull(ProjectionFamily):
    """Six-parameter Mobius family in exponential coordinates at the identity."""

    param_dim = 6
    target_dim = 1
    family_id = "mobius-full"

    def _group_element(self, lam):
        lam = np.asarray(lam, dtype=float).ravel()
        if lam.shape != (6,):
            raise ValueError("mobius-full takes six parameters")
        A = sum(lam[i] * SL2_BASIS[i] for i in range(6))
        return exp_sl2(A, 1.0)

    def eval(self, lam, p):
        image = self._group_element(lam).apply(as_extended(p))
        if image.is_infinity:
            raise SingularPointError("point maps to infinity at this parameter")
        return image.z.real

    def act(self, lam, p):
        return self._group_element(lam).apply(as_extended(p))

    def dt_identity(self, p):
        return mobius_identity_partials(p)

    def point_from_xy(self, x, y):
        return complex(x, y)

    def eval_many(self, lam, points):
        return _mobius_eval_grid(self._group_element(lam).matrix, points)

    def dt_identity_many(self, points):
        z = _as_complex_array(points)
        z2 = z * z
        cols = [2 * z.real, -2 * z.imag, np.ones_like(z.real), np.zeros_like(z.real), -z2.real, z2.imag]
        return np.stack(cols, axis=1)

    def to_json_dict(self):
        return {"kind": "mobius-full"}


class ProjectiveOneParam(ProjectionFamily):
    """One-parameter projective flow followed by the (x:z) projection."""

    param_dim = 1
    target_dim = 1

    def __init__(self, A):
        self.generator = check_gl3_generator(A, allow_zero=True)
        self.family_id = "projective[%s]" % ",".join("%.12g" % v for v in self.generator.ravel())

    def eval(self, lam, p):
        image = projective_family_eval(self.generator, float(lam), _as_hompoint(p))
        return image.affine()

    def act(self, lam, p):
        return proj_apply(exp_gl3(self.generator, float(lam)), _as_hompoint(p))

    def in_domain(self, lam, p):
        image = proj_apply(exp_gl3(self.generator, float(lam)), _as_hompoint(p))
        x, _, z = image.coords
        return math.hypot(x, z) > DENOM_TOL

    def dt_identity(self, p):
        return projective_dt_identity(self.generator, p)

    def point_from_xy(self, x, y):
        return np.array([x, y])

    def eval_many(self, lam, points):
        return _projective_eval_grid(exp_gl3(self.generator, float(lam)).matrix, points)

    def dt_identity_many(self, points):
        pts = np.asarray(points, dtype=float)
        x, y = pts[:, 0], pts[:, 1]
        A = self.generator
        v = A[0, 0] * x + A[0, 1] * y + A[0, 2] - x * (A[2, 0] * x + A[2, 1] * y + A[2, 2])
        return v[:, None]

    def to_json_dict(self):
        from .serialize import real_matrix_to_json

        return {"kind": "projective-one-param", "generator": real_matrix_to_json(self.generator)}


class ProjectiveFull(ProjectionFamily):
    """Nine-parameter projective family in exponential coordinates."""

    param_dim = 9
    target_dim = 1
    family_id = "projective-full"

    def _group_element(self, lam):
        lam = np.asarray(lam, dtype=float).ravel()
        if lam.shape != (9,):
            raise ValueError("projective-full takes nine parameters")
        return exp_gl3(lam.reshape(3, 3), 1.0)

    def eval(self, lam, p):
        return pi_standard(proj_apply(self._group_element(lam), _as_hompoint(p))).affine()

    def act(self, lam, p):
        return proj_apply(self._group_element(lam), _as_hompoint(p))

    def dt_identity(self, p):
        return projective_identity_partials(p)

    def point_from_xy(self, x, y):
        return np.array([x, y])

    def eval_many(self, lam, points):
        return _projective_eval_grid(self._group_element(lam).matrix, points)

    def dt_identity_many(self, points):
        pts = np.asarray(points, dtype=float)
        x, y = pts[:, 0], pts[:, 1]
        one = np.ones_like(x)
        zero = np.zeros_like(x)
        return np.stack([x, y, one, zero, zero, zero, -x * x, -x * y, -x], axis=1)

    def to_json_dict(self):
        return {"kind": "projective-full"}


class RotationFamily(ProjectionFamily):
    """Orthogonal projections of R^n onto rotating m-planes (chart coordinates)."""

    def __init__(self, n=2, m=1):
        if not (1 <= m < n <= 4):
            raise ValueError("rotation family supports 1 <= m < n <= 4")
        self.n = n
        self.m = m
        self.param_dim = (n - m) * m
        self.target_dim = m
        self.family_id = "rotation[n=%d,m=%d]" % (n, m)
        self._pairs = [(i, j) for i in range(m) for j in range(m, n)]

    def _rotation(self, lam):
        lam = np.atleast_1d(np.asarray(lam, dtype=float)).ravel()
        K = np.zeros((self.n, self.n))
        for theta, (i, j) in zip(lam, self._pairs):
            K += theta * rotation_generator(self.n, i, j)
        return expm(K)

    def eval(self, lam, p):
        q = np.asarray(p, dtype=float)
        out = self._rotation(lam).T @ q
        return out[: self.m] if self.m > 1 else float(out[0])

    def act(self, lam, p):
        return self._rotation(lam).T @ np.asarray(p, dtype=float)

    def dt_identity(self, p):
        q = np.asarray(p, dtype=float)
        grad = np.zeros((self.m, self.param_dim))
        for col, (i, j) in enumerate(self._pairs):
            grad[i, col] = q[j]
        return grad[0] if self.m == 1 else grad

    def point_from_xy(self, x, y):
        return np.array([x, y])

    def eval_many(self, lam, points):
        pts = np.asarray(points, dtype=float)
        R = self._rotation(lam)
        vals = pts @ R[:, : self.m]
        if self.m == 1:
            vals = vals[:, 0]
        return vals, np.ones(pts.shape[0], dtype=bool)

    def dt_identity_many(self, points):
        pts = np.asarray(points, dtype=float)
        if self.m == 1:
            return pts[:, 1:]
        raise NotImplementedError("grid derivatives implemented for one-dimensional targets")

    def to_json_dict(self):
        return {"kind": "rotation", "n": self.n, "m": self.m}


class KleinFamily(RotationFamily):
    """Closest-point projections onto rotating geodesic subspaces in the Klein
    ball: identical to Euclidean orthogonal projection on the ball."""

    def __init__(self, n=2, m=1):
        super().__init__(n, m)
        self.family_id = "klein[n=%d,m=%d]" % (n, m)

    def _check(self, p):
        q = np.asarray(p, dtype=float)
        if np.linalg.norm(q) >= 1.0:
            raise OutsideBallError("Klein-model points lie strictly inside the unit ball")
        return q

    def eval(self, lam, p):
        return super().eval(lam, self._check(p))

    def to_json_dict(self):
        return {"kind": "klein", "n": self.n, "m": self.m}


class SphereFamily(ProjectionFamily):
    """Closest-point projections onto rotating geodesic subspaces of the
    n-sphere, in projectivized coordinates centered at the base point.

    Points live on the unit sphere of R^(n+1) with the base point at
    e_(n+1); subspaces rotate inside the first n coordinates.
    """

    def __init__(self, n=2, m=1):
        if not (1 <= m < n <= 4):
            raise ValueError("sphere family supports 1 <= m < n <= 4")
        self.n = n
        self.m = m
        self.param_dim = (n - m) * m
        self.target_dim = m
        self.family_id = "sphere[n=%d,m=%d]" % (n, m)
        self._pairs = [(i, j) for i in range(m) for j in range(m, n)]

    def _rotation(self, lam):
        lam = np.atleast_1d(np.asarray(lam, dtype=float)).ravel()
        K = np.zeros((self.n + 1, self.n + 1))
        for theta, (i, j) in zip(lam, self._pairs):
            K[: self.n, : self.n] += theta * rotation_generator(self.n, i, j)
        return expm(K)

    def eval(self, lam, p):
        q = np.asarray(p, dtype=float)
        if abs(np.linalg.norm(q) - 1.0) > 1e-9:
            raise ValueError("sphere points must have unit norm")
        u = self._rotation(lam).T @ q
        if abs(u[-1]) < DENOM_TOL:
            raise EquatorSingularityError("point on the equator dual to the base point")
        c = np.zeros(self.n + 1)
        c[: self.m] = u[: self.m]
        c[-1] = u[-1]
        nrm = np.linalg.norm(c)
        if nrm < DENOM_TOL:
            raise EquatorSingularityError("point orthogonal to the subspace")
        vals = u[: self.m] / u[-1]
        return vals if self.m > 1 else float(vals[0])

    def act(self, lam, p):
        return self._rotation(lam).T @ np.asarray(p, dtype=float)

    def closest_point(self, lam, p):
        """The on-sphere closest point itself (not its chart coordinates)."""
        R = self._rotation(lam)
        V = np.column_stack([R[:, : self.m], np.eye(self.n + 1)[:, -1]])
        return sphere_closest_point(np.asarray(p, dtype=float), V)

    def dt_identity(self, p):
        q = np.asarray(p, dtype=float)
        if abs(q[-1]) < DENOM_TOL:
            raise EquatorSingularityError("point on the equator dual to the base point")
        grad = np.zeros((self.m, self.param_dim))
        for col, (i, j) in enumerate(self._pairs):
            grad[i, col] = q[j] / q[-1]
        return grad[0] if self.m == 1 else grad

    def to_json_dict(self):
        return {"kind": "sphere", "n": self.n, "m": self.m}


# ---------------------------------------------------------------------------
# numeric derivative check and conjugation


def family_dt_numeric(family, lam, p, h=1e-4):
    """Central-difference parameter gradient of a family at (lam, p).

    Raises SingularPointError when a stencil point leaves the domain.
    """
    lam = np.atleast_1d(np.asarray(lam, dtype=float))
    k = family.param_dim
    if lam.shape != (k,):
        raise ValueError("parameter must have length %d" % k)
    out = np.empty(k)
    for j in range(k):
        lp = lam.copy()
        lm = lam.copy()
        lp[j] += h
        lm[j] -= h
        fp = family.eval(lp if k > 1 else float(lp[0]), p)
        fm = family.eval(lm if k > 1 else float(lm[0]), p)
        out[j] = (np.asarray(fp) - np.asarray(fm)) / (2.0 * h)
    return out if k > 1 else float(out[0])


def conjugate_generator(A, M):
    """Conjugated flow generator M A M^{-1} (matrices of matching shape)."""
    if isinstance(M, (MobiusMap, ProjectiveMap)):
        M = M.matrix
    M = np.asarray(M)
    A = np.asarray(A)
    return M @ A @ np.linalg.inv(M)


def conjugate_family(family, M):
    """Family with the generator conjugated by an invertible map.

    The conjugated family moves points along M gamma_t M^{-1}; evaluation at
    the transported point matches the original family up to the coordinate
    change of the target.
    """
    if isinstance(family, MobiusOneParam):
        return MobiusOneParam(conjugate_generator(family.generator, M))
    if isinstance(family, ProjectiveOneParam):
        return ProjectiveOneParam(conjugate_generator(family.generator, M))
    raise ValueError("conjugation is defined for one-parameter matrix families")


def family_from_json(data):
    """Rebuild a family from its JSON dictionary."""
    from .serialize import complex_matrix_from_json, real_matrix_from_json

    kind = data.get("kind")
    if kind == "mobius-one-param":
        return MobiusOneParam(complex_matrix_from_json(data["generator"]))
    if kind == "projective-one-param":
        return ProjectiveOneParam(real_matrix_from_json(data["generator"]))
    if kind == "mobius-full":
        return MobiusFull()
    if kind == "projective-full":
        return ProjectiveFull()
    if kind == "rotation":
        return RotationFamily(data["n"], data["m"])
    if kind == "klein":
        return KleinFamily(data["n"], data["m"])
    if kind == "sphere":
        return SphereFamily(data["n"], data["m"])
    raise ValueError("unknown family kind %r" % (kind,))


def _as_complex_array(points):
    pts = np.asarray(points)
    if np.iscomplexobj(pts):
        return pts.astype(complex).ravel()
    pts = np.asarray(pts, dtype=float)
    if pts.ndim == 2 and pts.shape[1] == 2:
        return pts[:, 0] + 1j * pts[:, 1]
    return pts.astype(complex).ravel()


def _as_hompoint(p):
    if isinstance(p, HomPoint2):
        return p
    arr = np.asarray(p, dtype=float)
    if arr.shape == (2,):
        return HomPoint2.from_affine(arr[0], arr[1])
    return HomPoint2(arr)
