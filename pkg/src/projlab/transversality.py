"""Degeneracy analysis for projection families.

Given a family Pi(lambda, p), the normalized increment
Phi(lambda, v, w) = (Pi(lambda, v) - Pi(lambda, w)) / |v - w| must have a
uniformly large parameter derivative wherever it is small; this module checks
that condition on sampled triples, estimates the largest workable constant,
predicts where the condition degenerates for one-parameter Mobius and
projective flows, classifies those flows, and locates the degenerate set
empirically on point grids.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .algebra import (
    CoincidentPointsError,
    ExtendedComplex,
    HomPoint2,
    INFINITY,
    MobiusMap,
    ProjectiveMap,
    SingularPointError,
    as_extended,
    chordal_dist,
    check_gl3_generator,
    check_sl2_generator,
    exp_gl3,
    exp_sl2,
)

NOT_APPLICABLE = "not-applicable"
PASS = "pass"
FAIL = "fail"

# Log-spaced candidate constants 2^0 .. 2^-20; the finest value doubles as
# the degeneracy cutoff of constant estimation.
C_GRID = 0.5 ** np.arange(0, 21)
C_FLOOR = float(C_GRID[-1])

# A line is "vertical" when its direction's x-component is below this after
# normalization.
VERTICAL_TOL = 1e-9

ORBIT_TS = np.linspace(-5.0, 5.0, 1001)
ORBIT_TOL = 1e-9


class EmptyRegionError(ValueError):
    """Sampling region contains no usable points."""


# ---------------------------------------------------------------------------
# loci


@dataclass
class LocusDescription:
    """Predicted set where the derivative condition degenerates.

    kind is one of "empty", "affine-line", "line-at-infinity", "whole-space",
    "circle".  Affine lines are stored as unit-normal coefficients of
    a*x + b*y = c; circles arise only as transported affine lines.
    """

    kind: str
    normal: tuple | None = None
    offset: float | None = None
    center: tuple | None = None
    radius: float | None = None
    singular_orbit: dict | None = None

    @classmethod
    def empty(cls, **kw):
        return cls("empty", **kw)

    @classmethod
    def whole_space(cls, **kw):
        return cls("whole-space", **kw)

    @classmethod
    def line_at_infinity(cls, **kw):
        return cls("line-at-infinity", **kw)

    @classmethod
    def affine_line(cls, a, b, c, **kw):
        n = math.hypot(a, b)
        if n == 0.0:
            raise ValueError("line normal must be non-zero")
        a, b, c = a / n, b / n, c / n
        # canonical sign: first non-negligible normal component positive
        lead = a if abs(a) > VERTICAL_TOL else b
        if lead < 0:
            a, b, c = -a, -b, -c
        return cls("affine-line", normal=(a, b), offset=c, **kw)

    @property
    def is_vertical(self):
        if self.kind != "affine-line":
            return False
        return abs(self.normal[1]) < VERTICAL_TOL

    def euclidean_distance(self, x, y):
        """Distance from affine chart points to the locus (vectorized)."""
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        if self.kind == "affine-line":
            a, b = self.normal
            return np.abs(a * x + b * y - self.offset)
        if self.kind == "circle":
            cx, cy = self.center
            return np.abs(np.hypot(x - cx, y - cy) - self.radius)
        if self.kind == "whole-space":
            return np.zeros_like(x)
        return np.full_like(x, np.inf)

    def contains_extended(self, p, tol=ORBIT_TOL):
        """Chordal membership of an extended-complex point in the locus closure."""
        p = as_extended(p)
        if self.kind == "whole-space":
            return True
        if self.kind == "empty":
            return False
        if self.kind == "affine-line":
            if p.is_infinity:
                return True  # affine lines close up through infinity
            z = p.z
            a, b = self.normal
            signed = a * z.real + b * z.imag - self.offset
            foot = z - signed * complex(a, b)
            return chordal_dist(p, ExtendedComplex(foot)) <= tol
        if self.kind == "circle":
            if p.is_infinity:
                return False
            z = p.z
            cx, cy = self.center
            d = math.hypot(z.real - cx, z.imag - cy)
            return abs(d - self.radius) <= tol * (1.0 + abs(z) ** 2) / 2.0
        raise ValueError("membership undefined for locus kind %r" % self.kind)

    def contains_hompoint(self, p, tol=ORBIT_TOL):
        """Sine-metric membership of a projective point in the locus."""
        if self.kind == "whole-space":
            return True
        if self.kind == "empty":
            return False
        if self.kind == "line-at-infinity":
            ell = np.array([0.0, 0.0, 1.0])
        elif self.kind == "affine-line":
            a, b = self.normal
            ell = np.array([a, b, -self.offset])
            ell = ell / np.linalg.norm(ell)
        else:
            raise ValueError("membership undefined for locus kind %r" % self.kind)
        v = p.coords if isinstance(p, HomPoint2) else HomPoint2(p).coords
        return abs(float(ell @ v)) <= tol

    def summary(self):
        if self.kind == "affine-line":
            a, b = self.normal
            if self.is_vertical:
                return "x=%.12g" % (self.offset / a)
            if abs(a) < VERTICAL_TOL:
                return "y=%.12g" % (self.offset / b)
            return "%.12g*x%+.12g*y=%.12g" % (a, b, self.offset)
        if self.kind == "circle":
            return "circle(center=(%.12g,%.12g), r=%.12g)" % (*self.center, self.radius)
        return self.kind

    def to_json_dict(self):
        out = {"kind": self.kind, "summary": self.summary()}
        if self.kind == "affine-line":
            out["normal"] = [self.normal[0], self.normal[1]]
            out["offset"] = self.offset
            out["vertical"] = bool(self.is_vertical)
        if self.kind == "circle":
            out["center"] = [self.center[0], self.center[1]]
            out["radius"] = self.radius
        if self.singular_orbit is not None:
            out["singular_orbit"] = self.singular_orbit
        return out


@dataclass
class ClassificationVerdict:
    """Outcome of the flow trichotomy, with the evidence used to decide it."""

    verdict: str  # FailsGlobally | FailsOnLine | HoldsEverywhere | HoldsWithArtifactLocus
    case: str  # fails-globally | bad | good | artifact
    locus: LocusDescription
    reason: str = ""
    transported_locus: LocusDescription | None = None
    orbit_samples: list = field(default_factory=list)

    def to_json_dict(self):
        line = self.locus.summary() if self.locus.kind != "line-at-infinity" else "infinity"
        out = {
            "verdict": self.verdict,
            "case": self.case,
            "reason": self.reason,
            "locus": self.locus.to_json_dict(),
            "line": line,
            "orbit_samples": self.orbit_samples,
        }
        if self.transported_locus is not None:
            out["transported_locus"] = self.transported_locus.to_json_dict()
            out["line"] = self.transported_locus.summary() + " (transported)"
        return out


# ---------------------------------------------------------------------------
# regions and triples


@dataclass(frozen=True)
class Region:
    """Sampling region in the planar chart, plus a parameter-ball radius."""

    kind: str = "box"
    bounds: tuple = (-1.0, 1.0, -1.0, 1.0)
    param_radius: float = 0.0

    @classmethod
    def box(cls, x0, x1, y0, y1, param_radius=0.0):
        if not (x1 > x0 and y1 > y0):
            raise EmptyRegionError("box bounds must be increasing")
        return cls("box", (float(x0), float(x1), float(y0), float(y1)), param_radius)

    @classmethod
    def disk(cls, radius, cx=0.0, cy=0.0, param_radius=0.0):
        if radius <= 0:
            raise EmptyRegionError("disk radius must be positive")
        return cls("disk", (float(cx), float(cy), float(radius)), param_radius)

    @property
    def diameter(self):
        if self.kind == "box":
            x0, x1, y0, y1 = self.bounds
            return math.hypot(x1 - x0, y1 - y0)
        return 2.0 * self.bounds[2]

    def sample_points(self, rng, n):
        if self.kind == "box":
            x0, x1, y0, y1 = self.bounds
            xs = rng.uniform(x0, x1, n)
            ys = rng.uniform(y0, y1, n)
            return np.column_stack([xs, ys])
        cx, cy, r = self.bounds
        radii = r * np.sqrt(rng.uniform(0.0, 1.0, n))
        ang = rng.uniform(0.0, 2.0 * math.pi, n)
        return np.column_stack([cx + radii * np.cos(ang), cy + radii * np.sin(ang)])

    def contains(self, pts):
        pts = np.asarray(pts, dtype=float)
        if self.kind == "box":
            x0, x1, y0, y1 = self.bounds
            return (pts[:, 0] >= x0) & (pts[:, 0] <= x1) & (pts[:, 1] >= y0) & (pts[:, 1] <= y1)
        cx, cy, r = self.bounds
        return np.hypot(pts[:, 0] - cx, pts[:, 1] - cy) <= r

    def grid(self, nx, ny):
        if self.kind != "box":
            raise ValueError("grids are defined on box regions")
        x0, x1, y0, y1 = self.bounds
        xs = np.linspace(x0, x1, nx)
        ys = np.linspace(y0, y1, ny)
        return xs, ys

    def to_json_dict(self):
        return {"kind": self.kind, "bounds": list(self.bounds), "param_radius": self.param_radius}


@dataclass(frozen=True)
class Triple:
    """A parameter value with two distinct points of the chart."""

    lam: object
    v: object
    w: object


@dataclass
class ScanReport:
    """Numerical evidence from a region scan or constant estimation."""

    family_id: str
    region: dict
    best_constant: float = 0.0
    worst_triple: dict | None = None
    degenerate_points: np.ndarray = field(default_factory=lambda: np.empty((0, 4)))
    tolerance: float = 0.0
    counts: dict = field(default_factory=dict)
    work: dict = field(default_factory=dict)

    def degenerate_rows(self):
        return [tuple(row) for row in np.asarray(self.degenerate_points)]

    def to_json_dict(self):
        return {
            "family_id": self.family_id,
            "region": self.region,
            "best_constant": float(self.best_constant),
            "worst_triple": self.worst_triple,
            "degenerate_count": int(np.asarray(self.degenerate_points).shape[0]),
            "tolerance": float(self.tolerance),
            "counts": self.counts,
            "work": self.work,
        }


# ---------------------------------------------------------------------------
# the normalized increment and per-triple checks


def _separation(v, w):
    if isinstance(v, (complex, ExtendedComplex)) or isinstance(w, (complex, ExtendedComplex)):
        return abs(as_extended(v).z - as_extended(w).z)
    return float(np.linalg.norm(np.asarray(v, dtype=float) - np.asarray(w, dtype=float)))


def phi(family, lam, v, w):
    """Normalized increment (Pi(lam, v) - Pi(lam, w)) / |v - w|."""
    sep = _separation(v, w)
    if sep < 1e-14:
        raise CoincidentPointsError("points are numerically coincident")
    pv = np.asarray(family.eval(lam, v))
    pw = np.asarray(family.eval(lam, w))
    out = (pv - pw) / sep
    return float(out) if out.ndim == 0 else out


def _dphi(family, triple, h=1e-4):
    """Parameter Jacobian of Phi at a triple: analytic at the identity,
    central differences elsewhere."""
    lam = np.atleast_1d(np.asarray(triple.lam, dtype=float))
    sep = _separation(triple.v, triple.w)
    if np.max(np.abs(lam)) == 0.0:
        dv = np.atleast_1d(family.dt_identity(triple.v))
        dw = np.atleast_1d(family.dt_identity(triple.w))
        return (dv - dw) / sep
    k = family.param_dim
    out = np.empty(k)
    for j in range(k):
        lp = lam.copy()
        lm = lam.copy()
        lp[j] += h
        lm[j] -= h
        out[j] = (
            phi(family, lp if k > 1 else float(lp[0]), triple.v, triple.w)
            - phi(family, lm if k > 1 else float(lm[0]), triple.v, triple.w)
        ) / (2.0 * h)
    return out


def derivative_measure(family, triple):
    """Size of the parameter derivative of Phi, in the form the check uses.

    For a one-dimensional target this is the largest partial; for
    one-dimensional targets and parameters it is the single partial; in
    general it is det(D D^T)^(1/2).
    """
    D = np.atleast_2d(_dphi(family, triple))
    if family.target_dim == 1:
        return float(np.max(np.abs(D)))
    g = np.linalg.det(D @ D.T)
    return float(math.sqrt(max(g, 0.0)))


def check_triple(family, triple, C):
    """Check one triple against a candidate constant C.

    Returns NOT_APPLICABLE when |Phi| > C, otherwise PASS/FAIL depending on
    whether the derivative measure reaches C (C^2 for the determinant form).
    """
    p = phi(family, triple.lam, triple.v, triple.w)
    mag = float(np.linalg.norm(np.atleast_1d(p)))
    if mag > C:
        return NOT_APPLICABLE
    d = derivative_measure(family, triple)
    if family.target_dim == 1:
        return PASS if d >= C else FAIL
    return PASS if d >= C * C else FAIL


# ---------------------------------------------------------------------------
# null directions of the normalized increment


def _null_directions(family, lam0, pts, seps, coarse=16, iters=40):
    """Angles where Phi(lam0, p + sep e(theta), p) crosses zero, per point.

    Brackets a sign change adjacent to the coarse |Phi| minimum and bisects.
    Returns (theta, phi_at_theta, ok); ok is False where no bracket exists
    (stencil points in excluded fibers).
    """
    pts = np.asarray(pts, dtype=float)
    n = pts.shape[0]
    seps = np.broadcast_to(np.asarray(seps, dtype=float), (n,))
    base, base_ok = family.eval_many(lam0, pts)

    grid = np.linspace(0.0, 2.0 * math.pi, coarse, endpoint=False)
    phis = np.empty((coarse, n))
    for i, theta in enumerate(grid):
        off = pts + seps[:, None] * np.array([math.cos(theta), math.sin(theta)])
        vals, ok = family.eval_many(lam0, off)
        with np.errstate(invalid="ignore"):
            phis[i] = np.where(ok & base_ok, (vals - base) / seps, np.nan)

    absphi = np.where(np.isfinite(phis), np.abs(phis), np.inf)
    kmin = np.argmin(absphi, axis=0)
    idx = np.arange(n)
    phi_min = phis[kmin, idx]
    knext = (kmin + 1) % coarse
    kprev = (kmin - 1) % coarse
    use_next = phis[knext, idx] * phi_min <= 0
    kb = np.where(use_next, knext, kprev)
    lo = grid[kmin]
    hi = grid[kmin] + np.where(use_next, 1.0, -1.0) * (2.0 * math.pi / coarse)
    phi_lo = phi_min
    phi_bracket = phis[kb, idx]
    ok_mask = np.isfinite(phi_lo) & np.isfinite(phi_bracket) & (phi_lo * phi_bracket <= 0)

    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        off = pts + seps[:, None] * np.column_stack([np.cos(mid), np.sin(mid)])
        vals, ok = family.eval_many(lam0, off)
        with np.errstate(invalid="ignore"):
            phi_mid = np.where(ok & base_ok, (vals - base) / seps, np.nan)
        same = phi_mid * phi_lo > 0
        lo = np.where(same, mid, lo)
        phi_lo = np.where(same, phi_mid, phi_lo)
        hi = np.where(same, hi, mid)

    theta = 0.5 * (lo + hi)
    off = pts + seps[:, None] * np.column_stack([np.cos(theta), np.sin(theta)])
    vals, ok = family.eval_many(lam0, off)
    with np.errstate(invalid="ignore"):
        phi_hat = np.where(ok & base_ok, (vals - base) / seps, np.nan)
    ok_mask &= np.isfinite(phi_hat)
    return theta, phi_hat, ok_mask


def _null_margin(family, lam0, pts, sep):
    """Worst-case margin max(|Phi|, derivative) along the null direction."""
    pts = np.asarray(pts, dtype=float)
    theta, phi_hat, ok = _null_directions(family, lam0, pts, sep, coarse=8, iters=30)
    off = pts + sep * np.column_stack([np.cos(theta), np.sin(theta)])
    deriv = np.max(np.abs(family.dt_identity_many(off) - family.dt_identity_many(pts)), axis=1) / sep
    out = np.maximum(np.abs(phi_hat), deriv)
    return np.where(ok, out, np.inf)


def _clamp_to_region(region, pts):
    pts = np.array(pts, dtype=float)
    if region.kind == "box":
        x0, x1, y0, y1 = region.bounds
        pts[:, 0] = np.clip(pts[:, 0], x0, x1)
        pts[:, 1] = np.clip(pts[:, 1], y0, y1)
        return pts
    cx, cy, r = region.bounds
    d = np.hypot(pts[:, 0] - cx, pts[:, 1] - cy)
    over = d > r
    scale = np.where(over, r / np.maximum(d, 1e-300), 1.0)
    pts[:, 0] = cx + (pts[:, 0] - cx) * scale
    pts[:, 1] = cy + (pts[:, 1] - cy) * scale
    return pts


def _refine_worst_points(family, lam0, seeds, region, sep, iters=90):
    """Compass search driving the null-direction margin to its local infimum.

    Deterministic; used to decide whether a sampled near-degeneracy is a true
    zero of the margin inside the region.
    """
    pts = _clamp_to_region(region, seeds)
    k = pts.shape[0]
    steps = np.full(k, region.diameter / 8.0)
    fbest = _null_margin(family, lam0, pts, sep)
    moves = np.array([[1.0, 0.0], [-1.0, 0.0], [0.0, 1.0], [0.0, -1.0]])
    for _ in range(iters):
        if np.all(steps < 1e-12) or np.all(fbest < 0.5 * C_FLOOR):
            break
        cands = pts[:, None, :] + steps[:, None, None] * moves[None, :, :]
        flat = _clamp_to_region(region, cands.reshape(-1, 2))
        fc = _null_margin(family, lam0, flat, sep).reshape(k, 4)
        best_dir = np.argmin(fc, axis=1)
        best_val = fc[np.arange(k), best_dir]
        # demand a genuine decrease; rounding jitter must not stall the shrink
        improved = best_val < fbest - (1e-12 + 1e-6 * fbest)
        pts[improved] = flat.reshape(k, 4, 2)[np.arange(k), best_dir][improved]
        fbest = np.where(improved, best_val, fbest)
        steps = np.where(improved, steps, steps * 0.7)
    return pts, fbest


def _null_angle_single(family, lam, w_xy, sep, coarse=16, iters=32):
    """Scalar version of _null_directions at an arbitrary parameter value."""
    w = family.point_from_xy(*w_xy)
    try:
        base = family.eval(lam, w)
    except SingularPointError:
        return None

    def f(theta):
        v = family.point_from_xy(w_xy[0] + sep * math.cos(theta), w_xy[1] + sep * math.sin(theta))
        try:
            return (family.eval(lam, v) - base) / sep
        except SingularPointError:
            return None

    grid = [2.0 * math.pi * i / coarse for i in range(coarse)]
    vals = [f(t) for t in grid]
    best = None
    for i in range(coarse):
        a, b = vals[i], vals[(i + 1) % coarse]
        if a is None or b is None or a * b > 0:
            continue
        if best is None or min(abs(a), abs(b)) < best[0]:
            best = (min(abs(a), abs(b)), i)
    if best is None:
        return None
    i = best[1]
    lo, hi = grid[i], grid[i] + 2.0 * math.pi / coarse
    flo = vals[i]
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        fm = f(mid)
        if fm is None:
            return None
        if fm * flo > 0:
            lo, flo = mid, fm
        else:
            hi = mid
    return 0.5 * (lo + hi)


# ---------------------------------------------------------------------------
# constant estimation


def estimate_constant(family, region, triples=4096, seed=0):
    """Largest grid constant that no sampled triple violates.

    Pairs are sampled with log-spaced separations; half keep a uniformly
    random direction and half are refined onto the direction where the
    normalized increment vanishes, so near-fiber pairs (where the check has
    teeth) actually occur.  With region.param_radius > 0 the parameter is
    sampled in a ball around the identity and derivatives fall back to
    central differences.
    """
    if triples < 1:
        raise EmptyRegionError("need at least one triple")
    rng = np.random.default_rng(seed)
    w_pts = region.sample_points(rng, triples)
    angles = rng.uniform(0.0, 2.0 * math.pi, triples)
    seps = 10.0 ** rng.uniform(-6.0, math.log10(region.diameter), triples)
    refine = np.arange(triples) % 2 == 0

    k = family.param_dim
    if region.param_radius > 0.0:
        lams = rng.uniform(-region.param_radius, region.param_radius, (triples, k))
    else:
        lams = np.zeros((triples, k))

    lam0 = np.zeros(k) if k > 1 else 0.0
    at_identity = region.param_radius == 0.0
    if at_identity:
        theta, _, okr = _null_directions(family, lam0, w_pts[refine], seps[refine])
        sub = angles[refine]
        sub[okr] = theta[okr]
        angles[refine] = sub
    else:
        for i in np.nonzero(refine)[0]:
            lam = lams[i] if k > 1 else float(lams[i, 0])
            t = _null_angle_single(family, lam, w_pts[i], seps[i])
            if t is not None:
                angles[i] = t

    offs = np.column_stack([np.cos(angles), np.sin(angles)]) * seps[:, None]
    v_pts = w_pts + offs
    flip = ~region.contains(v_pts)
    v_pts[flip] = w_pts[flip] - offs[flip]
    usable = region.contains(v_pts)

    abs_phi = np.full(triples, np.nan)
    deriv = np.full(triples, np.nan)

    if at_identity:
        vals_v, mask_v = family.eval_many(lam0, v_pts)
        vals_w, mask_w = family.eval_many(lam0, w_pts)
        ok = usable & mask_v & mask_w
        sep = np.linalg.norm(v_pts - w_pts, axis=1)
        ok &= sep > 1e-14
        abs_phi[ok] = np.abs((vals_v[ok] - vals_w[ok]) / sep[ok])
        dv = family.dt_identity_many(v_pts[ok])
        dw = family.dt_identity_many(w_pts[ok])
        deriv[ok] = np.max(np.abs(dv - dw), axis=1) / sep[ok]
    else:
        for i in range(triples):
            if not usable[i]:
                continue
            lam = lams[i] if k > 1 else float(lams[i, 0])
            trip = Triple(lam, family.point_from_xy(*v_pts[i]), family.point_from_xy(*w_pts[i]))
            try:
                abs_phi[i] = abs(phi(family, lam, trip.v, trip.w))
                deriv[i] = derivative_measure(family, trip)
            except (SingularPointError, CoincidentPointsError):
                continue

    ok = np.isfinite(abs_phi) & np.isfinite(deriv)
    if not np.any(ok):
        raise EmptyRegionError("no usable triples in region")

    margin = np.where(ok, np.maximum(abs_phi, deriv), np.inf)

    # A suspiciously small sampled margin may shadow a true zero between
    # samples; chase it down with a deterministic local search before
    # accepting a positive constant.
    refined_pts = np.empty((0, 2))
    refined_margin = np.empty(0)
    if at_identity and 0.0 < float(np.min(margin)) < 2.0**-6:
        order = np.argsort(margin)[:8]
        sep_fine = max(1e-9, 1e-6 * region.diameter)
        refined_pts, refined_margin = _refine_worst_points(
            family, lam0, w_pts[order], region, sep_fine
        )
        keep = np.isfinite(refined_margin)
        refined_pts, refined_margin = refined_pts[keep], refined_margin[keep]

    grid_phi = np.concatenate([abs_phi[ok], np.zeros_like(refined_margin)])
    grid_der = np.concatenate([deriv[ok], refined_margin])
    best = 0.0
    for C in C_GRID:
        if np.all((grid_phi > C) | (grid_der >= C)):
            best = float(C)
            break

    worst = int(np.argmin(margin))
    failing = ok & (margin < C_FLOOR)
    rows = [np.column_stack([w_pts[failing, 0], w_pts[failing, 1], deriv[failing], abs_phi[failing]])]
    bad = refined_margin < C_FLOOR
    if np.any(bad):
        rows.append(
            np.column_stack(
                [refined_pts[bad, 0], refined_pts[bad, 1], refined_margin[bad], np.zeros(int(np.sum(bad)))]
            )
        )
    degenerate = np.vstack(rows)
    return ScanReport(
        family_id=family.family_id,
        region=region.to_json_dict(),
        best_constant=best,
        worst_triple={
            "lam": [float(x) for x in np.atleast_1d(lams[worst])],
            "v": [float(v_pts[worst, 0]), float(v_pts[worst, 1])],
            "w": [float(w_pts[worst, 0]), float(w_pts[worst, 1])],
            "abs_phi": float(abs_phi[worst]),
            "derivative": float(deriv[worst]),
        },
        degenerate_points=degenerate,
        tolerance=C_FLOOR,
        counts={"triples": int(triples), "seed": int(seed), "usable": int(np.sum(ok))},
        work={"pair_evaluations": int(2 * np.sum(usable))},
    )


# ---------------------------------------------------------------------------
# predicted loci


def _scale_tol(A):
    return 1e-12 * max(1.0, float(np.max(np.abs(A))))


def mobius_orbit_of_infinity(A, ts=ORBIT_TS):
    """Samples of the flow orbit through the infinite point."""
    return [exp_sl2(A, float(t)).apply(INFINITY) for t in ts]


def projective_orbit_of_source(A, ts=ORBIT_TS):
    """Samples of the flow orbit through the projection source (0:1:0)."""
    e2 = np.array([0.0, 1.0, 0.0])
    return [HomPoint2(exp_gl3(A, float(t)).matrix @ e2) for t in ts]


def _orbit_description(samples, source):
    pts = []
    for t, s in zip(np.linspace(-5.0, 5.0, 17), samples[:: max(1, len(samples) // 16)]):
        if isinstance(s, ExtendedComplex):
            if s.is_infinity:
                pts.append({"t": float(t), "infinite": True})
            else:
                pts.append({"t": float(t), "x": s.z.real, "y": s.z.imag, "infinite": False})
        else:
            x, y, z = s.coords
            if abs(z) <= 1e-9:
                pts.append({"t": float(t), "infinite": True})
            else:
                pts.append({"t": float(t), "x": x / z, "y": y / z, "infinite": False})
    return {"source": source, "samples": pts}


def predict_locus_mobius(A):
    """Degeneracy locus of a one-parameter Mobius flow.

    With generator entries a11, a21: the line Im(a11 - a21 z) = 0 when
    a21 != 0; empty when a21 = 0 and Im(a11) != 0; the whole plane when the
    flow reduces to translations/dilations.
    """
    A = check_sl2_generator(A)
    tol = _scale_tol(A)
    a11, a21 = A[0, 0], A[1, 0]
    orbit = _orbit_description(mobius_orbit_of_infinity(A, np.linspace(-5, 5, 17)), "infinity")
    if abs(a21) < tol:
        if abs(a11.imag) < tol:
            return LocusDescription.whole_space(singular_orbit=orbit)
        return LocusDescription.empty(singular_orbit=orbit)
    # Im(a11 - a21 z) = Im(a11) - Im(a21) x - Re(a21) y
    return LocusDescription.affine_line(a21.imag, a21.real, a11.imag, singular_orbit=orbit)


def predict_locus_projective(A):
    """Degeneracy locus of a one-parameter projective flow.

    The vertical line a32 x = a12 when a32 != 0; the line at infinity when
    a32 = 0 and a12 != 0; all of the plane when both vanish.
    """
    A = check_gl3_generator(A)
    tol = _scale_tol(A)
    a12, a32 = A[0, 1], A[2, 1]
    orbit = _orbit_description(
        projective_orbit_of_source(A, np.linspace(-5, 5, 17)), "source-at-infinity"
    )
    if abs(a32) >= tol:
        return LocusDescription.affine_line(1.0, 0.0, a12 / a32, singular_orbit=orbit)
    if abs(a12) >= tol:
        return LocusDescription.line_at_infinity(singular_orbit=orbit)
    return LocusDescription.whole_space(singular_orbit=orbit)


# ---------------------------------------------------------------------------
# classification


def classify_mobius(A):
    """Trichotomy for one-parameter Mobius flows.

    Translation/dilation flows fail everywhere; flows whose infinite orbit is
    an invariant vertical line fail exactly on that line; an invariant
    non-vertical line preserves dimension along itself; otherwise the
    predicted line is an artifact and the projection statements survive.
    """
    A = check_sl2_generator(A)
    tol = _scale_tol(A)
    a11, a12, a21 = A[0, 0], A[0, 1], A[1, 0]
    locus = predict_locus_mobius(A)
    samples = mobius_orbit_of_infinity(A)
    osamp = locus.singular_orbit["samples"] if locus.singular_orbit else []

    if abs(a21) < tol and abs(a11.imag) < tol:
        if abs(a11) < tol:
            reason = "flow is the translation z -> z + %s*t" % _fmt_c(a12)
        else:
            center = -a12 / (2.0 * a11)
            reason = "flow is a dilation centered at %s" % _fmt_c(center)
        return ClassificationVerdict("FailsGlobally", "fails-globally", locus, reason, orbit_samples=osamp)

    if locus.kind == "empty":
        return ClassificationVerdict(
            "HoldsEverywhere", "good", locus, "flow fixes infinity and degeneracy set is empty",
            orbit_samples=osamp,
        )

    on_line = all(locus.contains_extended(s) for s in samples)
    if on_line and locus.is_vertical:
        return ClassificationVerdict(
            "FailsOnLine", "bad", locus,
            "infinite orbit is the invariant vertical line %s" % locus.summary(),
            orbit_samples=osamp,
        )
    if on_line:
        return ClassificationVerdict(
            "HoldsEverywhere", "good", locus,
            "projection restricted to the invariant line %s is a similarity" % locus.summary(),
            orbit_samples=osamp,
        )
    return ClassificationVerdict(
        "HoldsWithArtifactLocus", "artifact", locus,
        "infinite orbit leaves its tangent line %s" % locus.summary(),
        orbit_samples=osamp,
    )


def classify_projective(A, conjugator=None):
    """Trichotomy for one-parameter projective flows.

    Flows preserving the projection source fail globally; flows whose source
    orbit stays on the predicted line (a vertical line or the line at
    infinity) fail along it; otherwise the line is an artifact.  When the flow
    was obtained by conjugation, passing the conjugator also reports the locus
    transported back to the original coordinates.
    """
    A = check_gl3_generator(A)
    tol = _scale_tol(A)
    locus = predict_locus_projective(A)
    transported = None
    if conjugator is not None and locus.kind in ("affine-line", "line-at-infinity"):
        transported = transport_locus(locus, conjugator)
    osamp = locus.singular_orbit["samples"] if locus.singular_orbit else []

    if abs(A[0, 1]) < tol and abs(A[2, 1]) < tol:
        return ClassificationVerdict(
            "FailsGlobally", "fails-globally", locus,
            "flow preserves the projection source (0:1:0)",
            transported_locus=transported, orbit_samples=osamp,
        )

    samples = projective_orbit_of_source(A)
    on_line = all(locus.contains_hompoint(s) for s in samples)
    if on_line:
        return ClassificationVerdict(
            "FailsOnLine", "bad", locus,
            "source orbit is the invariant line %s" % locus.summary(),
            transported_locus=transported, orbit_samples=osamp,
        )
    return ClassificationVerdict(
        "HoldsWithArtifactLocus", "artifact", locus,
        "source orbit leaves its tangent line %s" % locus.summary(),
        transported_locus=transported, orbit_samples=osamp,
    )


def _fmt_c(z):
    z = complex(z)
    if z.imag == 0:
        return "%.12g" % z.real
    return "(%.12g%+.12gi)" % (z.real, z.imag)


# ---------------------------------------------------------------------------
# locus transport


def transport_locus(locus, M):
    """Image of a locus under the inverse of a coordinate change.

    Projective maps send projective lines to projective lines; Mobius maps
    send extended lines to extended lines or circles (computed by transporting
    three points).
    """
    if locus.kind in ("empty", "whole-space"):
        return LocusDescription(locus.kind)

    if isinstance(M, (np.ndarray, list, tuple)):
        arr = np.asarray(M)
        M = MobiusMap(arr) if arr.shape == (2, 2) else ProjectiveMap(arr)

    if isinstance(M, ProjectiveMap):
        if locus.kind == "line-at-infinity":
            ell = np.array([0.0, 0.0, 1.0])
        elif locus.kind == "affine-line":
            a, b = locus.normal
            ell = np.array([a, b, -locus.offset])
        else:
            raise ValueError("cannot transport locus kind %r projectively" % locus.kind)
        new = M.matrix.T @ ell  # points q with M q on the old line
        if math.hypot(new[0], new[1]) <= VERTICAL_TOL * abs(new[2]):
            return LocusDescription.line_at_infinity()
        return LocusDescription.affine_line(new[0], new[1], -new[2])

    if isinstance(M, MobiusMap):
        if locus.kind == "circle":
            a, b = 0.0, 0.0
            cx, cy = locus.center
            base = [
                complex(cx + locus.radius, cy),
                complex(cx - locus.radius, cy),
                complex(cx, cy + locus.radius),
            ]
        elif locus.kind == "affine-line":
            a, b = locus.normal
            foot = locus.offset * complex(a, b)
            direction = complex(-b, a)
            base = [foot, foot + direction, INFINITY]
        else:
            raise ValueError("cannot transport locus kind %r through a Mobius map" % locus.kind)
        inv = M.inverse()
        images = [inv.apply(z) for z in base]
        return _through_three_points(images)

    raise ValueError("unsupported transport map %r" % (M,))


def _through_three_points(points):
    finite = [p.z for p in points if not p.is_infinity]
    if len(finite) < len(points):
        if len(finite) < 2:
            raise ValueError("degenerate three-point configuration")
        z1, z2 = finite[0], finite[1]
        d = z2 - z1
        return LocusDescription.affine_line(-d.imag, d.real, -d.imag * z1.real + d.real * z1.imag)
    z1, z2, z3 = finite
    det = 2.0 * (
        z1.real * (z2.imag - z3.imag)
        + z2.real * (z3.imag - z1.imag)
        + z3.real * (z1.imag - z2.imag)
    )
    if abs(det) < 1e-12:
        d = z2 - z1
        return LocusDescription.affine_line(-d.imag, d.real, -d.imag * z1.real + d.real * z1.imag)
    s1, s2, s3 = abs(z1) ** 2, abs(z2) ** 2, abs(z3) ** 2
    ux = (s1 * (z2.imag - z3.imag) + s2 * (z3.imag - z1.imag) + s3 * (z1.imag - z2.imag)) / det
    uy = (s1 * (z3.real - z2.real) + s2 * (z1.real - z3.real) + s3 * (z2.real - z1.real)) / det
    r = abs(complex(ux, uy) - z1)
    return LocusDescription("circle", center=(ux, uy), radius=r)


# ---------------------------------------------------------------------------
# empirical degeneracy scan


def empirical_degeneracy_scan(family, region=None, grid=(200, 200), directions=16, tol=None):
    """Locate grid points where the derivative condition degenerates.

    For each grid point the direction with vanishing normalized increment is
    found by bracketing and bisection on the angle; the point is degenerate
    when the parameter-derivative measure along that direction falls below
    ``tol``.  With tol=None the cutoff self-calibrates to 1.4 grid steps times
    the observed Lipschitz constant of the derivative field (plus a tiny
    absolute floor): together with the half-step stencil displacement this
    keeps detections within 1.9 steps of the locus while still catching the
    grid row nearest to it.
    """
    if region is None:
        region = Region.box(-2.0, 2.0, -2.0, 2.0)
    if family.target_dim != 1:
        raise ValueError("grid scans are defined for one-dimensional targets")
    if directions < 4:
        raise ValueError("need at least four coarse directions to bracket")
    nx, ny = (grid, grid) if isinstance(grid, int) else grid
    xs, ys = region.grid(nx, ny)
    step = max(xs[1] - xs[0], ys[1] - ys[0])
    X, Y = np.meshgrid(xs, ys)
    pts = np.column_stack([X.ravel(), Y.ravel()])
    n = pts.shape[0]
    k = family.param_dim
    lam0 = np.zeros(k) if k > 1 else 0.0

    theta_hat, phi_hat, ok_mask = _null_directions(family, lam0, pts, step, coarse=directions)
    off = pts + step * np.column_stack([np.cos(theta_hat), np.sin(theta_hat)])

    d_base = family.dt_identity_many(pts)
    d_off = family.dt_identity_many(off)
    deriv = np.max(np.abs(d_off - d_base), axis=1) / step
    deriv = np.where(ok_mask, deriv, np.nan)

    field2d = deriv.reshape(ny, nx)
    finite = np.isfinite(field2d)
    if tol is None:
        if np.all(~finite):
            raise EmptyRegionError("no usable grid points")
        filled = np.where(finite, field2d, 0.0)
        gy, gx = np.gradient(filled, ys, xs)
        lip = float(np.nanmax(np.hypot(gx, gy)))
        tol = 1.4 * step * lip + 1e-9 * (1.0 + float(np.nanmax(filled)))

    degen_mask = np.isfinite(deriv) & (deriv <= tol)
    degenerate = np.column_stack(
        [pts[degen_mask, 0], pts[degen_mask, 1], deriv[degen_mask], phi_hat[degen_mask]]
    )
    min_deriv = float(np.nanmin(deriv)) if np.any(np.isfinite(deriv)) else float("nan")
    return ScanReport(
        family_id=family.family_id,
        region=region.to_json_dict(),
        best_constant=0.0 if degenerate.shape[0] else min_deriv,
        worst_triple=None,
        degenerate_points=degenerate,
        tolerance=float(tol),
        counts={"grid": [int(nx), int(ny)], "directions": int(directions)},
        work={"grid_points": int(n), "phi_evaluations": int(n * (directions + 41))},
    )
