"""Command-line front end.

Subcommands:
  curvature    exact quadruple curvature, or per-scale estimates at a point
  curve        Menger/Haantjes curvature of a sampled curve
  gh           Gromov-Hausdorff / Lipschitz distances and bounds
  sample       generate a surface sample and write its metric as JSON
  circumsphere circumradius of four points / cosphericity of five

Exit codes: 0 success, 2 invalid input or out-of-domain request,
3 capacity/connectivity/convergence failure.
"""

from __future__ import annotations

import argparse
import contextlib
import csv
import json
import sys
import warnings

import numpy as np

from . import __version__
from .circumsphere import circumradius, cospherical_test
from .curves import PolylineCurve, alt_curvature, curvature_consistency, haantjes_curvature
from .embedding import solve_embedding_curvature, wald_curvature_at_point
from .errors import (
    CapacityError,
    ConnectivityError,
    DomainError,
    InvalidArgument,
    UnstableEstimateError,
)
from .ghspace import (
    build_graph_approximation,
    gh_bounds,
    gh_distance_exact,
    lipschitz_distance,
)
from .metric_core import FiniteMetricSpace, MetricQuadruple
from .robinson import gauss_estimate
from .surfaces import load_mesh, sample_analytic


def _out_stream(args):
    if args.out:
        return open(args.out, "w", newline="")
    return contextlib.nullcontext(sys.stdout)  # don't close stdout


def _parse_scales(text: str) -> list:
    try:
        vals = [float(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise InvalidArgument(f"bad scale list {text!r}") from exc
    if not vals:
        raise InvalidArgument("empty scale list")
    return vals


def _load_space(path: str) -> FiniteMetricSpace:
    with open(path) as fh:
        return FiniteMetricSpace.from_json(fh.read())


def _space_as_sample(space: FiniteMetricSpace):
    """Adapter giving FiniteMetricSpace the sample-oracle interface."""

    class _Adapter:
        def __init__(self, s):
            self.space = s

        def __len__(self):
            return len(self.space)

        def distance(self, i, j):
            return float(self.space.dist[i, j])

        def distances_from(self, i):
            return self.space.dist[i]

    return _Adapter(space)


def curvature_map(sample, method, scales, out, seed: int = 0, points=None) -> None:
    """Per-vertex curvature table: one row per vertex, one column per scale.

    Vertices where the estimate fails keep their row with the error name
    in the flags column (partial results are still usable).
    """
    scales = list(scales)
    w = csv.writer(out)
    header = ["vertex"] + [f"estimate_{s:g}" for s in scales] + ["dispersion"]
    if method == "robinson":
        header.append("max_error_bound")
    header.append("flags")
    w.writerow(header)
    for p in points if points is not None else range(len(sample)):
        row: list = [p]
        flag = "ok"
        try:
            with warnings.catch_warnings():
                warnings.simplefilter("ignore")
                if method == "robinson":
                    table = gauss_estimate(sample, p, scales, seed=seed)
                    by_scale = {r.scale: r for r in table.rows}
                    row += [by_scale[s].median_K if s in by_scale else "" for s in scales]
                    last = table.rows[-1] if table.rows else None
                    row += [last.iqr if last else "", last.max_error_bound if last else ""]
                    if not table.rows:
                        flag = "no_quadruples"
                else:
                    ests = wald_curvature_at_point(sample, p, scales, seed=seed)
                    row += [e.kappa for e in ests] + [""] * (len(scales) - len(ests))
                    row += [ests[-1].dispersion if ests else ""]
                    if not ests:
                        flag = "no_quadruples"
        except (InvalidArgument, DomainError, UnstableEstimateError) as exc:
            row += [""] * (len(header) - 2)
            flag = type(exc).__name__
            row = row[: len(header) - 1]
        row.append(flag)
        w.writerow(row)


def _cmd_curvature(args) -> int:
    if args.quad:
        q = MetricQuadruple(*args.quad)
        scan = None
        if args.scan:
            lo, hi, n = args.scan.split(",")
            scan = (float(lo), float(hi), int(n))
        sol = solve_embedding_curvature(q, scan=scan)
        with _out_stream(args) as out:
            out.write(sol.to_json() + "\n")
        return 0
    if not args.space:
        raise InvalidArgument("need --quad, or --space")
    space = _load_space(args.space)
    sample = _space_as_sample(space)
    scales = _parse_scales(args.scales) if args.scales else [space.diam / 2**i for i in range(1, 5)]
    with _out_stream(args) as out:
        if args.point is None:
            curvature_map(sample, args.method, scales, out, seed=args.seed)
            return 0
        w = csv.writer(out)
        if args.method == "robinson":
            table = gauss_estimate(sample, args.point, scales, seed=args.seed)
            w.writerow(["scale", "median_K", "iqr", "max_error_bound", "n_quads"])
            for r in table.rows:
                w.writerow([r.scale, r.median_K, r.iqr, r.max_error_bound, r.n_quads])
        else:
            ests = wald_curvature_at_point(sample, args.point, scales, seed=args.seed)
            w.writerow(["scale", "median_kappa", "iqr", "n_quads"])
            for e in ests:
                w.writerow([e.scale, e.kappa, e.dispersion, e.quadruple_count])
    return 0


def _cmd_curve(args) -> int:
    with open(args.curve) as fh:
        curve = PolylineCurve.from_json(fh.read())
    windows = _parse_scales(args.windows) if args.windows else None
    if windows is None:
        total = float(curve.arclen[-1])
        windows = [total / 8 / 2**i for i in range(3)]
    points = [args.point] if args.point is not None else range(len(curve))
    with _out_stream(args) as out:
        w = csv.writer(out)
        w.writerow(["index", "arclen", "curvature", "method"])
        for p in points:
            try:
                if args.method == "alt":
                    val = alt_curvature(curve, p, windows)
                elif args.method == "haantjes":
                    val = haantjes_curvature(curve, p, windows)
                else:
                    rep = curvature_consistency(curve, p, windows)
                    val = 0.5 * (rep.alt + rep.haantjes)
            except (InvalidArgument, UnstableEstimateError):
                if args.point is not None:
                    raise
                continue  # endpoints without a full window are skipped
            w.writerow([p, float(curve.arclen[p]), val, args.method])
    return 0


def _cmd_gh(args) -> int:
    x = _load_space(args.space_x)
    y = _load_space(args.space_y)
    with _out_stream(args) as out:
        if args.method == "exact":
            out.write(f"{gh_distance_exact(x, y)}\n")
        elif args.method == "lipschitz":
            out.write(f"{lipschitz_distance(x, y)}\n")
        elif args.method == "graph":
            if args.eps is None or args.delta is None:
                raise InvalidArgument("graph method needs --eps and --delta")
            g = build_graph_approximation(x, args.eps, args.delta)
            out.write(g.to_json() + "\n")
        else:
            lo, hi = gh_bounds(x, y)
            out.write(f"{lo} {hi}\n")
    return 0


def _cmd_sample(args) -> int:
    if args.mesh:
        sample = load_mesh(args.mesh)
    else:
        params = {}
        for kv in args.param or []:
            key, _, val = kv.partition("=")
            if not _:
                raise InvalidArgument(f"bad --param {kv!r}, expected key=value")
            try:
                params[key] = float(val)
            except ValueError:
                params[key] = val  # string-valued, e.g. layout=grid
        sample = sample_analytic(args.kind, n=args.n, seed=args.seed, **params)
    space = sample.metric_space()
    with _out_stream(args) as out:
        out.write(space.to_json() + "\n")
    return 0


def _cmd_circumsphere(args) -> int:
    ds = args.distances
    with _out_stream(args) as out:
        if len(ds) == 6:
            q = MetricQuadruple(*ds)
            out.write(f"{circumradius(q)}\n")
        elif len(ds) == 10:
            out.write(f"{cospherical_test(ds)}\n")
        else:
            raise InvalidArgument("need 6 distances (radius) or 10 (cosphericity)")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="metricurv", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"metricurv {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--out", help="write output to this file instead of stdout")
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--threads", type=int, default=1, help="reserved; must be >= 1")

    c = sub.add_parser("curvature", help="embedding curvature of quadruples or at a point")
    c.add_argument("--quad", type=float, nargs=6, metavar="D",
                   help="six distances d12 d13 d14 d23 d24 d34")
    c.add_argument("--scan", help="kappa scan as min,max,steps")
    c.add_argument("--space", help="finite metric space JSON file")
    c.add_argument("--point", type=int, help="vertex index for local estimates")
    c.add_argument("--method", choices=["wald", "robinson"], default="wald")
    c.add_argument("--scales", help="comma-separated ball radii")
    common(c)
    c.set_defaults(func=_cmd_curvature)

    cv = sub.add_parser("curve", help="curve curvature from a vertex/chord JSON file")
    cv.add_argument("curve", help="curve JSON (vertex list or {vertices, chords})")
    cv.add_argument("--point", type=int, help="vertex index; default: all interior points")
    cv.add_argument("--method", choices=["alt", "haantjes", "both"], default="both")
    cv.add_argument("--windows", help="comma-separated half-widths (arc length)")
    common(cv)
    cv.set_defaults(func=_cmd_curve)

    g = sub.add_parser("gh", help="distances between finite metric spaces")
    g.add_argument("space_x")
    g.add_argument("space_y")
    g.add_argument("--method", choices=["exact", "bounds", "lipschitz", "graph"],
                   default="bounds")
    g.add_argument("--eps", type=float)
    g.add_argument("--delta", type=float)
    common(g)
    g.set_defaults(func=_cmd_gh)

    s = sub.add_parser("sample", help="sample a surface and emit its metric as JSON")
    s.add_argument("kind", nargs="?", default="sphere",
                   choices=["sphere", "plane", "cylinder", "torus"])
    s.add_argument("--mesh", help="OFF/OBJ mesh file instead of an analytic model")
    s.add_argument("-n", type=int, default=200)
    s.add_argument("--param", action="append", metavar="KEY=VALUE",
                   help="surface parameter, e.g. R=2 (repeatable)")
    common(s)
    s.set_defaults(func=_cmd_sample)

    cs = sub.add_parser("circumsphere", help="circumradius (6 distances) or cosphericity (10)")
    cs.add_argument("distances", type=float, nargs="+")
    common(cs)
    cs.set_defaults(func=_cmd_circumsphere)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.threads < 1:
        print("error: --threads must be >= 1", file=sys.stderr)
        return 2
    try:
        return args.func(args)
    except (InvalidArgument, DomainError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (CapacityError, ConnectivityError, UnstableEstimateError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
