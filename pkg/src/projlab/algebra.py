"""Extended-plane and projective-plane arithmetic.

Points of the extended complex plane and of the real projective plane/line,
linear-fractional transformations acting on them, one-parameter flows via
matrix exponentials, and the Gram volume functional.  All values are immutable
after construction and all operations are pure.
"""

from __future__ import annotations

import math

import numpy as np

# Affine coordinates are never formed when a denominator is below this;
# such points are routed through the homogeneous/infinite representation.
DENOM_TOL = 1e-12
CHORDAL_TOL = 1e-9

# Branch switch for the closed-form 2x2 exponential: below this |omega*t|
# the sinc/cos factors are summed as short series to avoid cancellation.
SMALL_ANGLE = 1e-4


class SingularPointError(ValueError):
    """A point was mapped into the projection's excluded set."""


class CoincidentPointsError(ValueError):
    """Two points that must be distinct are numerically coincident."""


class DimensionMismatchError(ValueError):
    """Matrix shape incompatible with the requested operation."""


class ZeroGeneratorError(ValueError):
    """A flow generator must be non-zero."""


# ---------------------------------------------------------------------------
# points


class ExtendedComplex:
    """A point of the extended complex plane: a finite complex number or the
    single point at infinity.

    Finite values must have finite coordinates; the infinite point compares
    equal only to itself.
    """

    __slots__ = ("_z", "_inf")

    def __init__(self, z=0j, *, infinity=False):
        if infinity:
            self._z = None
            self._inf = True
            return
        z = complex(z)
        if not (math.isfinite(z.real) and math.isfinite(z.imag)):
            raise ValueError("finite point requires finite coordinates: %r" % (z,))
        self._z = z
        self._inf = False

    @classmethod
    def infinity(cls):
        return cls(infinity=True)

    @property
    def is_infinity(self):
        return self._inf

    @property
    def z(self):
        if self._inf:
            raise SingularPointError("point at infinity has no affine value")
        return self._z

    def __complex__(self):
        return self.z

    def __eq__(self, other):
        other = as_extended(other)
        if self._inf or other._inf:
            return self._inf and other._inf
        return self._z == other._z

    def __hash__(self):
        return hash(("ext-inf",)) if self._inf else hash(self._z)

    def __repr__(self):
        return "ExtendedComplex(infinity)" if self._inf else "ExtendedComplex(%r)" % (self._z,)


INFINITY = ExtendedComplex.infinity()


def as_extended(value):
    """Coerce a complex/real scalar (or ExtendedComplex) to ExtendedComplex."""
    if isinstance(value, ExtendedComplex):
        return value
    return ExtendedComplex(value)


def _canonical_projective(vec):
    # Unit norm, first coordinate of magnitude > DENOM_TOL made positive.
    # Skipping the division when the norm is already within 1e-12 of one makes
    # canonicalization an exact fixed point on canonical input.
    v = np.asarray(vec, dtype=float).copy()
    if not np.all(np.isfinite(v)):
        raise ValueError("homogeneous coordinates must be finite")
    n = float(np.linalg.norm(v))
    if n == 0.0:
        raise ValueError("homogeneous coordinates must not all vanish")
    if abs(n - 1.0) > 1e-12:
        v /= n
    for c in v:
        if abs(c) > DENOM_TOL:
            if c < 0.0:
                v = -v
            break
    return v


class HomPoint2:
    """Point of the real projective plane in homogeneous coordinates (x:y:z).

    The stored representative is canonical: unit Euclidean norm with the first
    non-negligible coordinate positive.  Two points are equal when their
    representatives are proportional.
    """

    __slots__ = ("coords",)

    def __init__(self, x, y=None, z=None):
        if y is None:
            vec = x
        else:
            vec = (x, y, z)
        v = _canonical_projective(vec)
        if v.shape != (3,):
            raise ValueError("HomPoint2 needs three coordinates")
        self.coords = v
        self.coords.flags.writeable = False

    @classmethod
    def from_affine(cls, x, y):
        return cls(float(x), float(y), 1.0)

    @property
    def is_infinite(self):
        return abs(self.coords[2]) <= DENOM_TOL

    def affine(self):
        x, y, z = self.coords
        if abs(z) <= DENOM_TOL:
            raise SingularPointError("infinite point has no affine coordinates")
        return (x / z, y / z)

    def __eq__(self, other):
        if not isinstance(other, HomPoint2):
            return NotImplemented
        return sine_distance(self.coords, other.coords) < 1e-12

    def __repr__(self):
        return "HomPoint2(%.12g:%.12g:%.12g)" % tuple(self.coords)


class HomPoint1:
    """Point of the real projective line in homogeneous coordinates (x:z)."""

    __slots__ = ("coords",)

    def __init__(self, x, z=None):
        vec = x if z is None else (x, z)
        v = _canonical_projective(vec)
        if v.shape != (2,):
            raise ValueError("HomPoint1 needs two coordinates")
        self.coords = v
        self.coords.flags.writeable = False

    @property
    def is_infinite(self):
        return abs(self.coords[1]) <= DENOM_TOL

    def affine(self):
        x, z = self.coords
        if abs(z) <= DENOM_TOL:
            raise SingularPointError("infinite point of the projective line")
        return x / z

    def __eq__(self, other):
        if not isinstance(other, HomPoint1):
            return NotImplemented
        a, b = self.coords, other.coords
        return abs(a[0] * b[1] - a[1] * b[0]) < 1e-12

    def __repr__(self):
        return "HomPoint1(%.12g:%.12g)" % tuple(self.coords)


INFINITY_Y = HomPoint2(0.0, 1.0, 0.0)
INFINITY_X = HomPoint1(1.0, 0.0)


# ---------------------------------------------------------------------------
# transformations


class MobiusMap:
    """Linear-fractional transformation z -> (az+b)/(cz+d), det-one matrix.

    The matrix is rescaled to determinant one on construction (the sign of the
    square root is immaterial: the action is invariant under a global sign
    flip).
    """

    __slots__ = ("matrix",)

    def __init__(self, matrix):
        m = np.array(matrix, dtype=complex)
        if m.shape != (2, 2):
            raise DimensionMismatchError("Mobius map needs a 2x2 matrix")
        det = m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0]
        if abs(det) < DENOM_TOL:
            raise ValueError("Mobius matrix is singular")
        if abs(det - 1.0) > 1e-9:
            m = m / np.sqrt(det)
        self.matrix = m
        self.matrix.flags.writeable = False

    @classmethod
    def identity(cls):
        return cls(np.eye(2))

    def compose(self, other):
        return MobiusMap(self.matrix @ other.matrix)

    def __matmul__(self, other):
        return self.compose(other)

    def inverse(self):
        a, b = self.matrix[0]
        c, d = self.matrix[1]
        return MobiusMap([[d, -b], [-c, a]])

    def apply(self, p):
        return mobius_apply(self, p)


class ProjectiveMap:
    """Invertible 3x3 real matrix acting on homogeneous coordinates."""

    __slots__ = ("matrix",)

    def __init__(self, matrix):
        m = np.array(matrix, dtype=float)
        if m.shape != (3, 3):
            raise DimensionMismatchError("projective map needs a 3x3 matrix")
        if abs(np.linalg.det(m)) <= 1e-12:
            raise ValueError("projective matrix is singular")
        self.matrix = m
        self.matrix.flags.writeable = False

    @classmethod
    def identity(cls):
        return cls(np.eye(3))

    def compose(self, other):
        return ProjectiveMap(self.matrix @ other.matrix)

    def __matmul__(self, other):
        return self.compose(other)

    def inverse(self):
        return ProjectiveMap(np.linalg.inv(self.matrix))

    def apply(self, p):
        return proj_apply(self, p)


def check_sl2_generator(A, *, allow_zero=False):
    """Validate a 2x2 complex traceless flow generator, returning it as an array."""
    A = np.asarray(A, dtype=complex)
    if A.shape != (2, 2):
        raise DimensionMismatchError("sl2 generator must be 2x2")
    if abs(A[0, 0] + A[1, 1]) >= 1e-12:
        raise ValueError("sl2 generator must be traceless")
    if not allow_zero and np.max(np.abs(A)) < 1e-15:
        raise ZeroGeneratorError("generator is identically zero")
    return A


def check_gl3_generator(A, *, allow_zero=False):
    """Validate a 3x3 real flow generator, returning it as an array."""
    A = np.asarray(A, dtype=float)
    if A.shape != (3, 3):
        raise DimensionMismatchError("gl3 generator must be 3x3")
    if not allow_zero and np.max(np.abs(A)) < 1e-15:
        raise ZeroGeneratorError("generator is identically zero")
    return A


# ---------------------------------------------------------------------------
# exponentials


def exp_sl2(A, t):
    """Exponential exp(A*t) of a traceless 2x2 complex generator.

    Uses the closed form for traceless matrices, A^2 = -det(A)*Id:
    exp(A t) = cos(w t) Id + sinc(w t) t A with w^2 = det(A).
    """
    A = check_sl2_generator(A, allow_zero=True)
    t = float(t)
    det = A[0, 0] * A[1, 1] - A[0, 1] * A[1, 0]
    w = np.sqrt(complex(det))
    x = w * t
    if abs(x) < SMALL_ANGLE:
        x2 = x * x
        cosx = 1.0 - x2 / 2.0 + x2 * x2 / 24.0
        sinc = 1.0 - x2 / 6.0 + x2 * x2 / 120.0
    else:
        cosx = np.cos(x)
        sinc = np.sin(x) / x
    return MobiusMap(cosx * np.eye(2) + (sinc * t) * A)


def expm(M, theta=0.25, degree=12):
    """Scaling-and-squaring matrix exponential with a short Taylor core.

    The core degree and scaling threshold keep the truncation error well below
    1e-13 for the matrix norms this library works at.
    """
    M = np.asarray(M)
    n = M.shape[0]
    if M.shape != (n, n):
        raise DimensionMismatchError("expm needs a square matrix")
    nrm = float(np.linalg.norm(M, ord="fro"))
    s = 0
    if nrm > theta:
        s = int(math.ceil(math.log2(nrm / theta)))
    B = M / (2.0**s)
    out = np.eye(n, dtype=B.dtype)
    term = np.eye(n, dtype=B.dtype)
    for k in range(1, degree + 1):
        term = term @ B / k
        out = out + term
    for _ in range(s):
        out = out @ out
    return out


def exp_gl3(A, t):
    """Exponential flow exp(A*t) of a 3x3 real generator as a projective map."""
    A = check_gl3_generator(A, allow_zero=True)
    return ProjectiveMap(expm(A * float(t)))


# ---------------------------------------------------------------------------
# actions and projections


def mobius_apply(g, p):
    """Apply a Mobius map to an extended-complex point.

    The pole -d/c goes to infinity; infinity goes to a/c (or stays at infinity
    when c = 0).  Total on valid input.
    """
    m = g.matrix if isinstance(g, MobiusMap) else MobiusMap(g).matrix
    a, b = m[0]
    c, d = m[1]
    p = as_extended(p)
    if p.is_infinity:
        if abs(c) < DENOM_TOL:
            return INFINITY
        return ExtendedComplex(a / c)
    z = p.z
    num = a * z + b
    den = c * z + d
    if abs(den) < DENOM_TOL * max(1.0, abs(num)):
        return INFINITY
    return ExtendedComplex(num / den)


def proj_apply(g, p):
    """Apply a projective map to a point of the projective plane."""
    m = g.matrix if isinstance(g, ProjectiveMap) else ProjectiveMap(g).matrix
    if not isinstance(p, HomPoint2):
        p = HomPoint2(p)
    return HomPoint2(m @ p.coords)


def pi_standard(p):
    """Coordinate projection (x:y:z) -> (x:z) of the projective plane.

    Restricted to the affine plane this is (x, y) -> x; infinite points other
    than the excluded source map to the infinite point of the target line.
    """
    if not isinstance(p, HomPoint2):
        p = HomPoint2(p)
    x, y, z = p.coords
    if math.hypot(x, z) <= DENOM_TOL:
        raise SingularPointError("projection source (0:1:0) is excluded")
    return HomPoint1(x, z)


# ---------------------------------------------------------------------------
# metrics


def sine_distance(u, v):
    """Sine of the angle between two non-zero vectors (projective distance)."""
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    nu = np.linalg.norm(u)
    nv = np.linalg.norm(v)
    if nu == 0.0 or nv == 0.0:
        raise ValueError("sine distance needs non-zero vectors")
    cross = np.linalg.norm(np.cross(u, v)) if u.shape == (3,) else abs(u[0] * v[1] - u[1] * v[0])
    return float(min(1.0, cross / (nu * nv)))


def chordal_dist(p, q):
    """Chordal metric: spherical chord length on the extended plane, sine of
    the subspace angle on projective points.  Symmetric, zero iff equal."""
    if isinstance(p, (HomPoint2, HomPoint1)) or isinstance(q, (HomPoint2, HomPoint1)):
        if type(p) is not type(q):
            raise DimensionMismatchError("chordal distance needs points of one space")
        return sine_distance(p.coords, q.coords)
    p = as_extended(p)
    q = as_extended(q)
    if p.is_infinity and q.is_infinity:
        return 0.0
    if p.is_infinity or q.is_infinity:
        z = q.z if p.is_infinity else p.z
        return 2.0 / math.sqrt(1.0 + abs(z) ** 2)
    v, w = p.z, q.z
    return 2.0 * abs(v - w) / math.sqrt((1.0 + abs(v) ** 2) * (1.0 + abs(w) ** 2))


def rho_gram(M):
    """Gram volume functional det(M M^T)^(1/2) of an m-by-k matrix, m <= k.

    Equals the m-dimensional volume distortion of the transpose map.
    """
    M = np.asarray(M, dtype=float)
    if M.ndim == 1:
        M = M[None, :]
    if M.ndim != 2:
        raise DimensionMismatchError("rho_gram needs a matrix")
    m, k = M.shape
    if m > k:
        raise DimensionMismatchError("rho_gram needs at most as many rows as columns")
    g = float(np.linalg.det(M @ M.T))
    return math.sqrt(max(g, 0.0))
