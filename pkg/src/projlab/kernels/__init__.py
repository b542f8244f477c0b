"""Hot kernels for the chaos-game sampler and box-occupancy counts.

At import time the compiled extension is preferred; the pure-numpy module is
the fallback (set PROJLAB_PURE=1 to force it).  Both backends implement the
same arithmetic in the same order, so results are bit-identical.
"""

import os

if os.environ.get("PROJLAB_PURE"):
    from . import _numpy as _impl

    BACKEND = "numpy"
else:
    try:
        from . import _native as _impl

        BACKEND = "native"
    except ImportError:
        from . import _numpy as _impl

        BACKEND = "numpy"

apply_similarities = _impl.apply_similarities
count_boxes_1d = _impl.count_boxes_1d
count_boxes_2d = _impl.count_boxes_2d


def backend_name():
    return BACKEND
