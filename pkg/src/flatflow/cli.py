"""Command-line entry point: ``flatflow <command> ...``.

Exit codes: 0 success, 1 domain error (its name is printed on stderr as
``error: <Name>: <message>``), 2 usage error.
"""

from __future__ import annotations

import argparse
import math
import sys
from pathlib import Path

import numpy as np

from flatflow import __version__
from flatflow.errors import FlatFlowError

BUNDLED = ("l3", "octagon")


def _load(arg: str):
    from flatflow.surface import build_surface
    from flatflow.surfacefile import bundled_path, parse_surface_file, surface_hash

    p = Path(arg)
    if not p.exists() and arg in BUNDLED:
        data = bundled_path(arg).read_bytes()
    else:
        data = p.read_bytes()
    return build_surface(parse_surface_file(data)), surface_hash(data)


def _out(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _meta(args, command: str, digest: str, **extra) -> dict:
    return {
        "command": command,
        "surface": Path(args.surface).name,
        "surface_hash": digest,
        "flatflow": __version__,
        "numpy": np.__version__,
        **extra,
    }


def _snap(v: float) -> float:
    # rounding noise of exactly axis-parallel holonomy
    return 0.0 if abs(v) < 1e-12 else v


def _base_patch(surface, R, max_nodes):
    from flatflow.cover import develop_patch
    from flatflow.surface import SurfacePoint

    base = SurfacePoint.at_cone(surface.singularities[0].id)
    return develop_patch(surface, base, R, max_nodes=max_nodes)


# ---------------------------------------------------------------------------


def cmd_validate(args) -> int:
    from flatflow.cover import surface_diameter
    from flatflow.surface import gauss_bonnet_check

    s, digest = _load(args.surface)
    print(f"surface {s.name or Path(args.surface).stem}  hash {digest}")
    print(f"polygons {len(s.polygons)}  gluings {len(s.gluings)}  area {s.area:.12g}")
    print(f"euler characteristic {s.euler_characteristic}  genus {s.genus}")
    print("cone  angle/pi  corners  singular")
    for c in s.cone_points:
        print(f"{c.id:4d}  {c.angle / math.pi:8.4f}  {len(c.corners):7d}  {'yes' if c.is_singular else 'no'}")
    print(f"gauss-bonnet residual {gauss_bonnet_check(s):.3g}")
    if args.diameter:
        print(f"diameter (grid estimate) {surface_diameter(s):.6g}")
    return 0


def cmd_saddles(args) -> int:
    from flatflow.report import write_meta, write_table
    from flatflow.saddles import enumerate_saddle_connections

    s, digest = _load(args.surface)
    out = _out(args)
    scs = enumerate_saddle_connections(s, args.max_length)
    rows = [(c.start, c.end, _snap(c.hol_x), _snap(c.hol_y), c.length) for c in scs]
    write_table(out, "saddles.csv", rows, args.seed)
    write_meta(out, _meta(args, "saddles", digest, max_length=args.max_length, seed=args.seed))
    print(f"{len(scs)} saddle connections of length <= {args.max_length:g} -> {out / 'saddles.csv'}")
    return 0


def cmd_cylinders(args) -> int:
    from flatflow.report import write_meta, write_table
    from flatflow.saddles import enumerate_cylinders

    s, digest = _load(args.surface)
    out = _out(args)
    cys = enumerate_cylinders(s, args.max_length)
    rows = [(c.direction, c.circumference, c.height, len(c.boundary[0]), len(c.boundary[1])) for c in cys]
    write_table(out, "cylinders.csv", rows, args.seed)
    write_meta(out, _meta(args, "cylinders", digest, max_length=args.max_length, seed=args.seed))
    print(f"{len(cys)} cylinders of circumference <= {args.max_length:g} -> {out / 'cylinders.csv'}")
    return 0


def _entropy(surface, R, max_nodes):
    from flatflow.entropy import entropy_from_patch

    patch = _base_patch(surface, R, max_nodes)
    return patch, entropy_from_patch(patch)


def cmd_entropy(args) -> int:
    from flatflow.entropy import orbit_counts, poincare_series
    from flatflow.report import write_meta, write_table

    s, digest = _load(args.surface)
    out = _out(args)
    patch, est = _entropy(s, args.radius, args.max_nodes)
    radii = np.linspace(args.radius / 4, args.radius, 24)
    counts = orbit_counts(patch, radii)
    write_table(out, "counts.csv", list(zip(counts.radii, counts.counts)), args.seed)
    write_table(
        out, "entropy.csv",
        [(est.e_hat, est.window[0], est.window[1], est.slope_half, est.slope_quarter, est.gap)],
        args.seed,
    )
    ps = poincare_series(patch, args.s_factor * est.e_hat, args.radius, est.e_hat)
    write_meta(out, _meta(args, "entropy", digest, radius=args.radius, seed=args.seed,
                          nodes=len(patch), poincare=ps.value, s=ps.s))
    print(f"e_hat {est.e_hat:.6g} (window gap {est.relative_gap:.2%}) from {len(patch)} lifts within R={args.radius:g}")
    return 0


def cmd_shadows(args) -> int:
    from flatflow.entropy import shadow_ratio_survey
    from flatflow.report import write_meta, write_table

    s, digest = _load(args.surface)
    out = _out(args)
    patch, est = _entropy(s, args.radius, args.max_nodes)
    sv = shadow_ratio_survey(patch, args.s_factor * est.e_hat, args.radius, est.e_hat, seed=args.seed)
    write_table(out, "shadows.csv", [(e.sing_id, e.dist, e.nu_hat, e.r_hat) for e in sv.estimates], args.seed)
    write_meta(out, _meta(args, "shadows", digest, radius=args.radius, seed=args.seed, e_hat=est.e_hat,
                          spread=sv.spread, conformal_median=sv.conformal_median))
    print(f"{len(sv.estimates)} singularities in [R/3, 2R/3]: spread {sv.spread:.6g}, "
          f"all positive {sv.all_positive}, conformal median error {sv.conformal_median:.4g}")
    return 0


def cmd_flow(args) -> int:
    from flatflow.config import worker_count
    from flatflow.cover import surface_diameter
    from flatflow.flow import (
        avoidance_and_straightness_stats,
        frequency_experiment,
        sample_many,
        scaling_regression,
    )
    from flatflow.report import write_meta, write_table
    from flatflow.saddles import enumerate_saddle_connections

    s, digest = _load(args.surface)
    out = _out(args)
    patch, est = _entropy(s, args.radius, args.max_nodes)
    sval = args.s_factor * est.e_hat
    lmax = 1.0
    while len(scs := enumerate_saddle_connections(s, lmax)) < args.arcs:
        lmax *= 1.5
    arcs = [c.as_path() for c in scs[: args.arcs]]
    samples = sample_many(patch, sval, args.radius, args.samples, args.seed, workers=worker_count())
    rep = frequency_experiment(s, patch, arcs, args.samples, sval, args.seed, args.radius, samples=samples)
    write_table(
        out, "freq.csv",
        [(a.arc_id, a.length, a.ext_length, a.passes, a.total_length, a.lambda_hat, a.ci_half) for a in rep.arcs],
        args.seed,
    )
    meta = _meta(args, "flow", digest, radius=args.radius, samples=args.samples, arcs=args.arcs,
                 seed=args.seed, e_hat=est.e_hat, s=sval)
    try:
        reg = scaling_regression(rep, est.e_hat, min_arcs=min(30, args.arcs))
        write_table(out, "regression.csv", [(reg.slope, reg.intercept, reg.r2, reg.n_arcs)], args.seed)
        summary = f"slope {reg.slope:.6g} vs -e_hat {-est.e_hat:.6g}, r2 {reg.r2:.4g}, {reg.n_arcs} arcs"
    except FlatFlowError as exc:
        write_table(out, "regression.csv", [], args.seed)
        summary = f"regression skipped ({exc.name})"
    if len(samples) >= 100:
        d = surface_diameter(s)
        st = avoidance_and_straightness_stats(samples, tuple(m * d for m in args.windows), seed=args.seed)
        write_table(out, "typicality.csv", list(zip(st.windows, st.avoid_fraction, st.n_eligible)), args.seed)
        meta.update(median_excess=st.median_excess, median_excess_ci=list(st.median_ci), diameter=d)
    write_meta(out, meta)
    print(f"{args.samples} samples, {len(arcs)} arcs: {summary}")
    return 0


def cmd_report(args) -> int:
    from flatflow.report import read_meta, read_table

    run = Path(args.rundir)
    if not run.is_dir():
        print(f"error: NotFound: {run} is not a directory", file=sys.stderr)
        return 1
    meta = read_meta(run)
    print(f"run: {meta.get('command')} on {meta.get('surface')} (hash {meta.get('surface_hash')}, seed {meta.get('seed')})")
    for csv_path in sorted(run.glob("*.csv")):
        rows = read_table(csv_path)
        line = f"  {csv_path.name}: {len(rows)} rows"
        if csv_path.name in ("regression.csv", "entropy.csv") and rows:
            line += "  " + ", ".join(f"{k}={v}" for k, v in rows[0].items() if k != "seed")
        print(line)
    return 0


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="flatflow", description="Flat surface geodesic experiments.")
    p.add_argument("--version", action="version", version=f"flatflow {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, fn, help_, out=True, seed=True):
        sp = sub.add_parser(name, help=help_)
        sp.add_argument("surface", help="surface file, or a bundled name (l3, octagon)")
        if out:
            sp.add_argument("--out", default="out", help="output directory (default: out)")
        if seed:
            sp.add_argument("--seed", type=int, default=0)
        sp.set_defaults(fn=fn)
        return sp

    sp = add("validate", cmd_validate, "check a surface and print its cone points", out=False, seed=False)
    sp.add_argument("--diameter", action="store_true", help="also estimate the diameter")
    sp = add("saddles", cmd_saddles, "list saddle connections")
    sp.add_argument("--max-length", type=_positive, required=True)
    sp = add("cylinders", cmd_cylinders, "list flat cylinders")
    sp.add_argument("--max-length", type=_positive, required=True)
    for name, fn, h in (("entropy", cmd_entropy, "orbit growth and volume entropy"),
                        ("shadows", cmd_shadows, "shadow-ratio survey")):
        sp = add(name, fn, h)
        sp.add_argument("--radius", type=_positive, required=True)
        sp.add_argument("--s-factor", type=_positive, default=1.05)
        sp.add_argument("--max-nodes", type=int, default=400_000)
    sp = add("flow", cmd_flow, "passage-frequency experiment")
    sp.add_argument("--samples", type=_positive_int, required=True)
    sp.add_argument("--radius", type=_positive, required=True)
    sp.add_argument("--arcs", type=_positive_int, required=True)
    sp.add_argument("--s-factor", type=_positive, default=1.05)
    sp.add_argument("--max-nodes", type=int, default=400_000)
    sp.add_argument("--windows", type=_positive, nargs="+", default=[10.0, 20.0, 40.0],
                    help="avoidance windows in units of the diameter")
    rp = sub.add_parser("report", help="summarize a run directory")
    rp.add_argument("rundir")
    rp.set_defaults(fn=cmd_report)
    return p


def _positive(v: str) -> float:
    x = float(v)
    if not x > 0:
        raise argparse.ArgumentTypeError("must be positive")
    return x


def _positive_int(v: str) -> int:
    x = int(v)
    if x <= 0:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return x


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.fn(args)
    except FlatFlowError as exc:
        print(f"error: {exc.name}: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
