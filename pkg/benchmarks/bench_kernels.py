#!/usr/bin/env python3
"""Time the compiled kernels against the pure-numpy fallback.

Usage: python3 benchmarks/bench_kernels.py [--points N] [--repeat R]
"""

import argparse
import time

import numpy as np

from projlab.kernels import _numpy as numpy_backend

try:
    from projlab.kernels import _native as native_backend
except ImportError:
    native_backend = None


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--points", type=int, default=1_000_000)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()

    rng = np.random.default_rng(0)
    n = args.points
    pts = np.ascontiguousarray(rng.uniform(0, 1, (n, 2)))
    vals = np.ascontiguousarray(pts[:, 0])
    ratios = np.array([1 / 9] * 4)
    angles = np.zeros(4)
    cos_t, sin_t = np.cos(angles), np.sin(angles)
    tx = np.array([0.0, 8 / 9, 0.0, 8 / 9])
    ty = np.array([0.0, 0.0, 8 / 9, 8 / 9])
    idx = rng.integers(0, 4, n, dtype=np.int64)
    eps = 2.0**-10

    cases = [
        ("chaos-game step (n=%d)" % n,
         lambda be: be.apply_similarities(pts, ratios, cos_t, sin_t, tx, ty, idx)),
        ("box count 2d (n=%d, eps=2^-10)" % n, lambda be: be.count_boxes_2d(pts, eps)),
        ("box count 1d (n=%d, eps=2^-10)" % n, lambda be: be.count_boxes_1d(vals, eps)),
    ]

    print("%-36s %12s %12s %9s" % ("kernel", "numpy", "native", "speedup"))
    for label, fn in cases:
        t_np = best_of(lambda: fn(numpy_backend), args.repeat)
        if native_backend is None:
            print("%-36s %10.1f ms %12s %9s" % (label, 1e3 * t_np, "missing", "-"))
            continue
        t_nat = best_of(lambda: fn(native_backend), args.repeat)
        a = fn(numpy_backend)
        b = fn(native_backend)
        agree = np.array_equal(np.asarray(a), np.asarray(b))
        print("%-36s %10.1f ms %10.1f ms %8.1fx  identical=%s"
              % (label, 1e3 * t_np, 1e3 * t_nat, t_np / t_nat, agree))


if __name__ == "__main__":
    main()
