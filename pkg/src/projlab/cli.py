"""Command-line front end.

Commands: scan | classify | locus | sweep | orbit | exp-check.
Exit codes: 0 success, 2 configuration/validation error, 3 domain violation.
All outputs are deterministic under a fixed seed.
"""

from __future__ import annotations

import argparse
import math
import sys

import numpy as np

from . import presets
from .algebra import SingularPointError, ZeroGeneratorError, exp_gl3, exp_sl2, expm
from .dimension import EmptyGridError, dim_sweep, ifs_generate, marstrand_report
from .families import MobiusOneParam, ProjectiveOneParam, RotationFamily
from .serialize import dump_json, write_csv
from .transversality import (
    EmptyRegionError,
    Region,
    classify_mobius,
    classify_projective,
    empirical_degeneracy_scan,
    estimate_constant,
    predict_locus_mobius,
    predict_locus_projective,
    transport_locus,
)


class ConfigError(ValueError):
    pass


def build_parser():
    p = argparse.ArgumentParser(prog="projlab", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, family=True, gen=True):
        if family:
            sp.add_argument("--family", default="mobius")
        if gen:
            sp.add_argument("--gen", help="flat real list (complex as re,im pairs) or preset name")
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--out", default=None)

    sp = sub.add_parser("scan", help="degeneracy grid scan plus constant estimate")
    common(sp)
    sp.add_argument("--region", default="-2,2,-2,2")
    sp.add_argument("--grid", default="200")
    sp.add_argument("--samples", type=int, default=4096)
    sp.add_argument("--tol", type=float, default=None)
    sp.add_argument("--directions", type=int, default=16)

    sp = sub.add_parser("classify", help="flow trichotomy verdict")
    common(sp)

    sp = sub.add_parser("locus", help="predicted degeneracy locus only")
    common(sp)

    sp = sub.add_parser("sweep", help="dimension sweep of a sampled set")
    common(sp)
    sp.add_argument("--preset", default="cantor9", choices=presets.IFS_PRESETS)
    sp.add_argument("--grid", default="64", help="number of parameter values")
    sp.add_argument("--points", type=int, default=200000)
    sp.add_argument("--margin", type=float, default=0.1)
    sp.add_argument("--lrange", default=None, help="parameter range a,b for matrix flows")

    sp = sub.add_parser("orbit", help="orbit/fiber/locus plot data")
    common(sp)
    sp.add_argument("--seeds", default=None, help="semicolon list: x,y pairs or inf/infY")
    sp.add_argument("--region", default="-2,2,-2,2")
    sp.add_argument("--samples", type=int, default=401)

    sp = sub.add_parser("exp-check", help="flow exponentials against a series oracle")
    sp.add_argument("--samples", type=int, default=100)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--out", default=None)
    return p


# ---------------------------------------------------------------------------
# argument parsing helpers


def parse_generator(family, text):
    if family not in ("mobius", "projective"):
        raise ConfigError("unknown family %r (expected mobius or projective)" % family)
    if text is None:
        raise ConfigError("--gen is required for this command")
    table = presets.MOBIUS_GENERATORS if family == "mobius" else presets.PROJECTIVE_GENERATORS
    if text in table:
        conj = presets.PROJECTIVE_CONJUGATORS.get(text) if family == "projective" else None
        return table[text], conj
    try:
        values = [float(v) for v in text.replace(";", ",").split(",") if v.strip() != ""]
    except ValueError as exc:
        raise ConfigError("generator entries must be numbers: %s" % exc) from None
    if family == "mobius":
        if len(values) != 8:
            raise ConfigError("mobius generator needs 8 reals (4 complex entries)")
        c = [complex(values[i], values[i + 1]) for i in range(0, 8, 2)]
        A = np.array([[c[0], c[1]], [c[2], c[3]]])
        if abs(A[0, 0] + A[1, 1]) >= 1e-12:
            raise ConfigError("mobius generator must be traceless")
        return A, None
    if len(values) != 9:
        raise ConfigError("projective generator needs 9 reals")
    return np.array(values, dtype=float).reshape(3, 3), None


def parse_region(text):
    try:
        x0, x1, y0, y1 = (float(v) for v in text.split(","))
        return Region.box(x0, x1, y0, y1)
    except (ValueError, EmptyRegionError) as exc:
        raise ConfigError("bad region %r: %s" % (text, exc)) from None


def parse_grid(text):
    try:
        if "x" in text:
            nx, ny = (int(v) for v in text.split("x"))
        else:
            nx = ny = int(text)
    except ValueError:
        raise ConfigError("bad grid %r" % text) from None
    if nx < 2 or ny < 2:
        raise ConfigError("grid must be at least 2x2")
    return nx, ny


def _family_for(args):
    A, conj = parse_generator(args.family, args.gen)
    if args.family == "mobius":
        return MobiusOneParam(A), A, conj
    return ProjectiveOneParam(A), A, conj


def _out(args, default):
    return args.out if args.out else default


# ---------------------------------------------------------------------------
# commands


def cmd_scan(args):
    family, A, _ = _family_for(args)
    region = parse_region(args.region)
    grid = parse_grid(args.grid)
    if args.samples < 1:
        raise ConfigError("--samples must be positive")
    if args.directions < 4:
        raise ConfigError("--directions must be at least 4")
    if args.tol is not None and args.tol < 0:
        raise ConfigError("--tol must be non-negative")
    scan = empirical_degeneracy_scan(family, region, grid, args.directions, args.tol)
    est = estimate_constant(family, region, triples=args.samples, seed=args.seed)
    # a degenerate grid point witnesses that no positive constant works
    scan.best_constant = 0.0 if scan.degenerate_points.shape[0] else est.best_constant
    scan.worst_triple = est.worst_triple
    scan.counts.update(est.counts)
    scan.work.update(est.work)
    out = _out(args, "projlab_scan")
    dump_json(scan.to_json_dict(), out + ".json")
    write_csv(
        out + ".csv",
        ["x", "y", "min_derivative", "phi_at_min"],
        scan.degenerate_rows(),
    )
    return 0


def _classification(args):
    A, conj = parse_generator(args.family, args.gen)
    if args.family == "mobius":
        return classify_mobius(A)
    return classify_projective(A, conjugator=conj)


def cmd_classify(args):
    verdict = _classification(args)
    dump_json(verdict.to_json_dict(), _out(args, "projlab_classify") + ".json")
    return 0


def cmd_locus(args):
    A, conj = parse_generator(args.family, args.gen)
    locus = predict_locus_mobius(A) if args.family == "mobius" else predict_locus_projective(A)
    data = locus.to_json_dict()
    if conj is not None and locus.kind in ("affine-line", "line-at-infinity"):
        data["transported"] = transport_locus(locus, _as_map(args.family, conj)).to_json_dict()
    dump_json(data, _out(args, "projlab_locus") + ".json")
    return 0


def _as_map(family, matrix):
    from .algebra import MobiusMap, ProjectiveMap

    return MobiusMap(matrix) if family == "mobius" else ProjectiveMap(matrix)


def cmd_sweep(args):
    try:
        count = int(args.grid)
    except ValueError:
        raise ConfigError("sweep --grid must be an integer") from None
    if count < 1:
        raise ConfigError("sweep needs at least one parameter value")
    if args.points < 1000:
        raise ConfigError("sweep needs at least 1000 points")

    if args.family == "rotation":
        family = RotationFamily(2, 1)
        lambdas = (np.arange(count) + 0.5) * math.pi / count
    else:
        family, A, _ = _family_for(args)
        if args.lrange:
            try:
                a, b = (float(v) for v in args.lrange.split(","))
            except ValueError:
                raise ConfigError("bad --lrange %r" % args.lrange) from None
        else:
            a, b = -1.0, 1.0
        lambdas = np.linspace(a, b, count)

    system = presets.ifs_preset(args.preset)
    cloud = ifs_generate(system, args.points, args.seed)
    try:
        sweep = dim_sweep(family, cloud, lambdas, margin=args.margin)
    except EmptyGridError as exc:
        raise ConfigError(str(exc)) from None

    all_excluded = [i for i, c in enumerate(sweep.excluded_counts) if c == len(cloud.points)]
    summary = sweep.to_json_dict()
    summary.update(marstrand_report(sweep))
    summary["fully_excluded_lambdas"] = all_excluded
    out = _out(args, "projlab_sweep")
    dump_json(summary, out + ".json")
    write_csv(out + ".csv", ["lambda", "slope", "r_squared", "excluded_count"], sweep.csv_rows())
    if all_excluded and len(all_excluded) == len(sweep.fits):
        print("error: the sampled set lies in an excluded fiber at every parameter", file=sys.stderr)
        return 3
    return 0


def _parse_seeds(args):
    if args.seeds is None:
        return ["inf" if args.family == "mobius" else "infY", (1.0, 0.0)]
    seeds = []
    for chunk in args.seeds.split(";"):
        chunk = chunk.strip()
        if chunk in ("inf", "infY"):
            seeds.append(chunk)
            continue
        try:
            x, y = (float(v) for v in chunk.split(","))
        except ValueError:
            raise ConfigError("bad seed %r" % chunk) from None
        seeds.append((x, y))
    return seeds


def cmd_orbit(args):
    A, conj = parse_generator(args.family, args.gen)
    region = parse_region(args.region)
    x0, x1, y0, y1 = region.bounds
    seeds = _parse_seeds(args)
    ts = np.linspace(-5.0, 5.0, args.samples)
    rows = []
    inv = np.linalg.inv(conj) if conj is not None else None

    for si, seed in enumerate(seeds):
        for t in ts:
            if args.family == "mobius":
                g = exp_sl2(A, float(t)).matrix
                if seed == "inf":
                    num, den = g[0, 0], g[1, 0]
                else:
                    z = complex(seed[0], seed[1])
                    num, den = g[0, 0] * z + g[0, 1], g[1, 0] * z + g[1, 1]
                if abs(den) < 1e-9 * max(1.0, abs(num)):
                    continue
                w = num / den
                x, y = w.real, w.imag
            else:
                g = exp_gl3(A, float(t)).matrix
                vec = np.array([0.0, 1.0, 0.0]) if seed == "infY" else np.array([seed[0], seed[1], 1.0])
                h = g @ vec
                if inv is not None:
                    h = inv @ h
                if abs(h[2]) < 1e-9 * max(1.0, abs(h[0]), abs(h[1])):
                    continue
                x, y = h[0] / h[2], h[1] / h[2]
            rows.append(("orbit", si, float(t), float(x), float(y)))

    for si, seed in enumerate(seeds):
        if seed in ("inf", "infY"):
            continue
        for s in np.linspace(y0, y1, 101):
            rows.append(("fiber", si, float(s), float(seed[0]), float(s)))

    locus = predict_locus_mobius(A) if args.family == "mobius" else predict_locus_projective(A)
    if conj is not None and locus.kind in ("affine-line", "line-at-infinity"):
        locus = transport_locus(locus, _as_map(args.family, conj))
    if locus.kind == "affine-line":
        a, b = locus.normal
        foot = np.array([a, b]) * locus.offset
        direction = np.array([-b, a])
        half = math.hypot(x1 - x0, y1 - y0)
        for s in np.linspace(-half, half, 101):
            p = foot + s * direction
            rows.append(("locus", 0, float(s), float(p[0]), float(p[1])))
    elif locus.kind == "circle":
        for s in np.linspace(0.0, 2.0 * math.pi, 101):
            rows.append(
                ("locus", 0, float(s),
                 locus.center[0] + locus.radius * math.cos(s),
                 locus.center[1] + locus.radius * math.sin(s))
            )

    write_csv(_out(args, "projlab_orbit") + ".csv", ["kind", "id", "t", "x", "y"], rows)
    return 0


def _taylor_exp(M, terms=20):
    out = np.eye(M.shape[0], dtype=M.dtype)
    term = np.eye(M.shape[0], dtype=M.dtype)
    for k in range(1, terms + 1):
        term = term @ M / k
        out = out + term
    return out


def cmd_exp_check(args):
    if args.samples < 1:
        raise ConfigError("--samples must be positive")
    rng = np.random.default_rng(args.seed)
    worst2 = 0.0
    worst3 = 0.0
    for _ in range(args.samples):
        B = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
        B[1, 1] = -B[0, 0]
        B *= rng.uniform(0.0, 2.0) / max(np.linalg.norm(B, 2), 1e-12)
        t = rng.uniform(-2.0, 2.0)
        t = _cap_product(B, t)
        err = np.max(np.abs(exp_sl2(B, t).matrix - _taylor_exp(B * t)))
        worst2 = max(worst2, float(err))

        C = rng.standard_normal((3, 3))
        C *= rng.uniform(0.0, 2.0) / max(np.linalg.norm(C, 2), 1e-12)
        t = _cap_product(C, rng.uniform(-2.0, 2.0))
        err = np.max(np.abs(expm(C * t) - _taylor_exp(C * t)))
        worst3 = max(worst3, float(err))

    tol = 1e-10
    data = {
        "samples": int(args.samples),
        "seed": int(args.seed),
        "max_error_2x2": worst2,
        "max_error_3x3": worst3,
        "tolerance": tol,
        "ok": bool(worst2 < tol and worst3 < tol),
    }
    dump_json(data, _out(args, "projlab_expcheck") + ".json")
    return 0 if data["ok"] else 1


def _cap_product(A, t, cap=2.75):
    # keep ||A t|| inside the series oracle's own accuracy range
    nrm = float(np.linalg.norm(A, 2)) * abs(t)
    if nrm > cap:
        t *= cap / nrm
    return t


HANDLERS = {
    "scan": cmd_scan,
    "classify": cmd_classify,
    "locus": cmd_locus,
    "sweep": cmd_sweep,
    "orbit": cmd_orbit,
    "exp-check": cmd_exp_check,
}


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return HANDLERS[args.command](args)
    except (ConfigError, ZeroGeneratorError) as exc:
        print("error: %s" % exc, file=sys.stderr)
        return 2
    except (EmptyRegionError, EmptyGridError, SingularPointError) as exc:
        print("error: %s" % exc, file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
