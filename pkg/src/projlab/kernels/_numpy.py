"""Pure-numpy kernel implementations (reference backend).

The expressions here must stay token-for-token equivalent to the compiled
backend: equality of outputs across backends is asserted by the tests.
"""

import numpy as np


def apply_similarities(points, ratios, cosines, sines, tx, ty, idx):
    """Apply the idx-selected planar similarity to each point.

    x' = r (c x - s y) + tx,  y' = r (s x + c y) + ty
    """
    r = ratios[idx]
    c = cosines[idx]
    s = sines[idx]
    x = points[:, 0]
    y = points[:, 1]
    out = np.empty_like(points)
    out[:, 0] = r * (c * x - s * y) + tx[idx]
    out[:, 1] = r * (s * x + c * y) + ty[idx]
    return out


def count_boxes_1d(values, eps):
    """Number of distinct boxes floor(v/eps) hit by the values."""
    return int(np.unique(np.floor(values / eps).astype(np.int64)).size)


def count_boxes_2d(points, eps):
    """Number of distinct planar boxes hit by the points."""
    ix = np.floor(points[:, 0] / eps).astype(np.int64)
    iy = np.floor(points[:, 1] / eps).astype(np.int64)
    iy_min = iy.min()
    span = int(iy.max() - iy_min) + 1
    return int(np.unique(ix * span + (iy - iy_min)).size)
