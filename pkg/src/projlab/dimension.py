"""Fractal test sets and box-counting dimension estimation.

Self-similar planar sets are sampled by a chaos game, their box-counting
dimension is estimated over dyadic scales, and whole parameter sweeps project
a sampled set through a projection family and estimate the dimension of every
image.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .kernels import apply_similarities, count_boxes_1d, count_boxes_2d

DEFAULT_SCALES = 0.5 ** np.arange(4, 13)  # 2^-4 .. 2^-12
# Scales where the occupied-box count exceeds this fraction of the sample size
# are saturated by finite sampling and are dropped from the fit.
SATURATION_FRACTION = 0.25
RELIABLE_R2 = 0.98


class NonContractiveError(ValueError):
    """Iterated maps must all be strict contractions."""


class DegenerateScalesError(ValueError):
    """Box-count fits need at least three usable, decreasing scales."""


class EmptyGridError(ValueError):
    """Parameter sweeps need a non-empty parameter grid."""


@dataclass(frozen=True)
class Similarity:
    """Contracting planar similarity x -> ratio * R(angle) x + (tx, ty)."""

    ratio: float
    angle: float
    tx: float
    ty: float

    def fixed_point(self):
        R = self.ratio * np.array(
            [[math.cos(self.angle), -math.sin(self.angle)],
             [math.sin(self.angle), math.cos(self.angle)]]
        )
        return np.linalg.solve(np.eye(2) - R, np.array([self.tx, self.ty]))


@dataclass(frozen=True)
class IFSSystem:
    """A finite list of contracting similarities in the plane."""

    maps: tuple
    name: str = "ifs"
    ambient_dim: int = 2

    def __post_init__(self):
        if self.ambient_dim != 2:
            raise ValueError("only planar systems are supported")
        if not self.maps:
            raise NonContractiveError("system needs at least one map")
        for m in self.maps:
            if not (0.0 < m.ratio < 1.0):
                raise NonContractiveError("ratios must lie in (0, 1)")

    @property
    def ratios(self):
        return np.array([m.ratio for m in self.maps])


@dataclass(frozen=True)
class PointCloud:
    """Sampled point set with the parameters that generated it."""

    points: np.ndarray
    provenance: dict


def ifs_generate(system, count, seed, depth=None):
    """Sample `count` attractor points by a depth-limited chaos game.

    Every output point is an independent composition of `depth` uniformly
    chosen maps applied to a fixed base point, so points lie within
    max_ratio^depth of the attractor.  Deterministic given the seed.
    """
    count = int(count)
    if count < 1:
        raise ValueError("count must be positive")
    rmax = float(np.max(system.ratios))
    if depth is None:
        depth = max(40, int(math.ceil(math.log(1e-12) / math.log(rmax))))
    ratios = np.array([m.ratio for m in system.maps])
    cosines = np.array([math.cos(m.angle) for m in system.maps])
    sines = np.array([math.sin(m.angle) for m in system.maps])
    tx = np.array([m.tx for m in system.maps])
    ty = np.array([m.ty for m in system.maps])

    rng = np.random.default_rng(seed)
    pts = np.tile(system.maps[0].fixed_point(), (count, 1))
    for _ in range(depth):
        idx = rng.integers(0, len(system.maps), size=count, dtype=np.int64)
        pts = apply_similarities(pts, ratios, cosines, sines, tx, ty, idx)
    return PointCloud(
        points=pts,
        provenance={
            "system": system.name,
            "count": count,
            "seed": int(seed),
            "depth": int(depth),
            "similarity_dimension": similarity_dimension(system),
        },
    )


def similarity_dimension(system):
    """Root s of sum(ratio_i^s) = 1, by bisection to 1e-12."""
    ratios = system.ratios
    if len(ratios) == 1:
        return 0.0
    lo, hi = 0.0, float(system.ambient_dim)

    def f(s):
        return float(np.sum(ratios**s) - 1.0)

    while f(hi) > 0.0:
        hi *= 2.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if hi - lo < 1e-12:
            break
        if f(mid) > 0.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


@dataclass(frozen=True)
class BoxCountFit:
    """Least-squares fit of log N(eps) against log(1/eps)."""

    scales: tuple
    counts: tuple
    slope: float
    r_squared: float

    @property
    def reliable(self):
        return self.r_squared >= RELIABLE_R2


def box_count_dim(points, scales=None):
    """Box-counting dimension estimate of a 1D or 2D point set.

    Boxes are anchored at the coordinate-wise minimum, making the counts
    exactly translation invariant.  Scales whose counts are saturated by the
    finite sample (count > SATURATION_FRACTION * n_points) are dropped, but a
    fit always keeps at least its three coarsest scales.
    """
    pts = np.ascontiguousarray(np.asarray(points, dtype=float))
    if pts.ndim == 2 and pts.shape[1] == 1:
        pts = pts[:, 0]
    if pts.ndim not in (1, 2):
        raise ValueError("points must be a vector or an (n, 2) array")
    n = pts.shape[0]
    if n == 0:
        raise DegenerateScalesError("cannot fit an empty point set")

    if scales is None:
        scales = DEFAULT_SCALES
    scales = np.asarray(scales, dtype=float)
    if scales.size < 3 or np.any(scales <= 0) or np.any(np.diff(scales) >= 0):
        raise DegenerateScalesError("need at least three strictly decreasing positive scales")

    # anchoring at the minimum makes counts translation invariant; the clamp
    # and the relative backoff keep points that sit on a box edge up to
    # rounding jitter in one consistent box
    anchored = np.maximum(pts - pts.min(axis=0), 0.0) * (1.0 - 2.0**-40)
    if anchored.ndim == 1:
        counts = np.array([count_boxes_1d(anchored, eps) for eps in scales], dtype=float)
    else:
        counts = np.array([count_boxes_2d(anchored, eps) for eps in scales], dtype=float)

    keep = counts <= SATURATION_FRACTION * n
    if np.sum(keep) < 3:
        keep = np.zeros_like(keep)
        keep[:3] = True
    scales_used = scales[keep]
    counts_used = counts[keep]

    xs = np.log2(1.0 / scales_used)
    ys = np.log2(counts_used)
    slope, intercept = np.polyfit(xs, ys, 1)
    resid = ys - (slope * xs + intercept)
    ss_tot = float(np.sum((ys - ys.mean()) ** 2))
    r2 = 1.0 if ss_tot == 0.0 else 1.0 - float(np.sum(resid**2)) / ss_tot
    return BoxCountFit(
        scales=tuple(float(s) for s in scales_used),
        counts=tuple(int(c) for c in counts_used),
        slope=float(slope),
        r_squared=float(r2),
    )


@dataclass
class DimSweepReport:
    """Per-parameter dimension estimates of a projected point set."""

    family_id: str
    set_id: str
    lambdas: np.ndarray
    fits: list
    excluded_counts: list
    target: float
    margin: float
    target_dim: int = 1
    exceptional: list = field(default_factory=list)

    def slopes(self):
        return np.array([f.slope for f in self.fits])

    def to_json_dict(self):
        return {
            "family_id": self.family_id,
            "set_id": self.set_id,
            "target": float(self.target),
            "margin": float(self.margin),
            "lambdas": [float(l) for l in self.lambdas],
            "slopes": [float(f.slope) if math.isfinite(f.slope) else None for f in self.fits],
            "r_squared": [float(f.r_squared) for f in self.fits],
            "excluded_counts": [int(c) for c in self.excluded_counts],
            "exceptional": [int(i) for i in self.exceptional],
            "non_exceptional_fraction": float(
                1.0 - len(self.exceptional) / max(1, len(self.fits))
            ),
        }

    def csv_rows(self):
        for lam, fit, exc in zip(self.lambdas, self.fits, self.excluded_counts):
            yield (float(lam), fit.slope, fit.r_squared, int(exc))


def _worker_count():
    env = os.environ.get("PROJLAB_THREADS")
    if env:
        return max(1, int(env))
    return min(4, os.cpu_count() or 1)


def dim_sweep(family, cloud, lambdas, margin=0.1, scales=None, target=None):
    """Project a cloud through every parameter value and estimate dimensions.

    Points landing in an excluded fiber are dropped per parameter and counted.
    The target dimension is min(target_dim, dim of the set); parameters whose
    estimate falls below target - margin are flagged exceptional.
    """
    lambdas = np.asarray(lambdas, dtype=float)
    if lambdas.size == 0:
        raise EmptyGridError("parameter grid is empty")
    pts = cloud.points
    if target is None:
        dim_set = cloud.provenance.get("similarity_dimension")
        if dim_set is None:
            dim_set = box_count_dim(pts, scales).slope
        target = min(float(family.target_dim), float(dim_set))

    def one(lam):
        values, mask = family.eval_many(lam, pts)
        excluded = int(np.sum(~mask))
        kept = values[mask]
        if kept.size == 0:
            return None, excluded
        return box_count_dim(kept, scales), excluded

    with ThreadPoolExecutor(max_workers=_worker_count()) as pool:
        results = list(pool.map(one, lambdas))

    fits, excluded = [], []
    singleton = BoxCountFit(scales=(1.0, 0.5, 0.25), counts=(0, 0, 0), slope=float("nan"), r_squared=0.0)
    for fit, exc in results:
        fits.append(fit if fit is not None else singleton)
        excluded.append(exc)

    exceptional = [
        i
        for i, fit in enumerate(fits)
        if not math.isfinite(fit.slope) or fit.slope < target - margin
    ]
    return DimSweepReport(
        family_id=family.family_id,
        set_id=cloud.provenance.get("system", "cloud"),
        lambdas=lambdas,
        fits=fits,
        excluded_counts=excluded,
        target=float(target),
        margin=float(margin),
        target_dim=int(family.target_dim),
        exceptional=exceptional,
    )


def marstrand_report(sweep):
    """Summary of a sweep: the fraction of parameters reaching the target,
    and (when the set dimension exceeds the target space) a covered-length
    proxy per parameter at the finest fitted scale."""
    slopes = sweep.slopes()
    finite = np.isfinite(slopes)
    frac = 1.0 - len(sweep.exceptional) / max(1, len(sweep.fits))
    out = {
        "family_id": sweep.family_id,
        "set_id": sweep.set_id,
        "target": sweep.target,
        "margin": sweep.margin,
        "non_exceptional_fraction": float(frac),
        "median_slope": float(np.median(slopes[finite])) if np.any(finite) else None,
    }
    if sweep.target >= sweep.target_dim - 0.05:
        covered = []
        for fit in sweep.fits:
            if fit.counts and fit.counts[-1] > 0:
                covered.append(float(fit.counts[-1] * fit.scales[-1]))
            else:
                covered.append(0.0)
        out["covered_length_proxy"] = covered
    return out
