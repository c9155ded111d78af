"""Command-line front end for reproducible experiment runs.

Every subcommand writes a canonical JSON report plus a .manifest.json
sidecar; --format csv adds the delimited view and --svg a rendered figure.
Reports are deterministic functions of their parameters and master seed
(DEGEN_DT_SEED provides the default seed), so rerunning a manifest
reproduces its report byte for byte.

Exit codes: 0 on success, 1 on a numeric failure (a machine-readable error
record is printed on stdout), 2 on usage errors.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time

from . import analytic, corner, largegrid, simulate
from .pointsets import PerturbationParams, SeedSpec, make_grid, make_polygon, perturb
from .report import RunManifest, write_csv, write_figure, write_report

_MODELS = {
    "dt": largegrid.DT_PERTURBED,
    "uniform": largegrid.UNIFORM_DIAGONALS,
    largegrid.DT_PERTURBED: largegrid.DT_PERTURBED,
    largegrid.UNIFORM_DIAGONALS: largegrid.UNIFORM_DIAGONALS,
}


def _default_seed() -> int:
    return int(os.environ.get("DEGEN_DT_SEED", "0"))


def _add_common(p, seed=True):
    p.add_argument("--out", default=None, help="output base path (no extension)")
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.add_argument("--svg", action="store_true", help="render a figure next to the output")
    p.add_argument("--threads", type=int, default=1, help="worker cap; does not affect results")
    if seed:
        p.add_argument("--seed", type=int, default=None, help="master seed (default: DEGEN_DT_SEED or 0)")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="dtbias", description=__doc__)
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="emit a point set as CSV")
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--grid", type=int, metavar="M")
    g.add_argument("--poly", type=int, metavar="N")
    p.add_argument("--perturb", action="store_true")
    p.add_argument("--scale", type=float, default=0.001)
    _add_common(p)

    p = sub.add_parser("sim-grid", help="Monte Carlo grid-code distribution")
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--iters", type=int, required=True)
    p.add_argument("--top-k", type=int, default=None)
    _add_common(p)

    p = sub.add_parser("sim-poly", help="Monte Carlo polygon-code distribution")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--iters", type=int, required=True)
    p.add_argument("--top-k", type=int, default=None)
    _add_common(p)

    p = sub.add_parser("tri-freq", help="Monte Carlo triangle-appearance frequencies")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--iters", type=int, required=True)
    _add_common(p)

    p = sub.add_parser("analytic-grid2", help="orthant probabilities of the 16 m=2 codes")
    p.add_argument("--target-se", type=float, default=1e-4)
    _add_common(p)

    p = sub.add_parser("analytic-poly", help="first-order distribution for n <= 7")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--target-se", type=float, default=1e-4)
    _add_common(p)

    p = sub.add_parser("walk", help="capped cycle walks through the central cell")
    p.add_argument("--model", required=True, choices=sorted(set(_MODELS)))
    p.add_argument("--walks", type=int, required=True)
    p.add_argument("--cap", type=int, default=40)
    p.add_argument("--m", type=int, default=None)
    _add_common(p)

    p = sub.add_parser("census", help="component census of the diagonal subgraph")
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--iters", type=int, required=True)
    p.add_argument("--model", required=True, choices=sorted(set(_MODELS)))
    _add_common(p)

    p = sub.add_parser("corner", help="corner-triangle probability by quadrature")
    p.add_argument("--n", required=True, help="polygon size, or a comma list for a table")
    p.add_argument("--nodes", type=int, default=32)
    p.add_argument("--tol", type=float, default=1e-3)
    p.add_argument(
        "--mc-iters",
        type=int,
        default=0,
        help="add a Monte Carlo column to the table using this many iterations",
    )
    _add_common(p)

    p = sub.add_parser("report", help="re-emit CSV/SVG views of a saved JSON report")
    p.add_argument("input", help="path to a report .json")
    _add_common(p, seed=False)
    return ap


def _emit(args, name: str, report: dict, manifest: RunManifest) -> None:
    base = args.out if args.out is not None else name
    formats = ("json", "csv") if args.format == "csv" else ("json",)
    paths = write_report(report, manifest, base, formats=formats, svg=args.svg)
    for p in paths:
        print(p)


def _manifest(args, command: str, params: dict, t0: float, discards=None) -> RunManifest:
    return RunManifest(
        command=command,
        params=params,
        master_seed=getattr(args, "seed", None),
        wall_clock_s=round(time.perf_counter() - t0, 3),
        discards=discards,
    )


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if getattr(args, "seed", None) is None and hasattr(args, "seed"):
        args.seed = _default_seed()
    t0 = time.perf_counter()
    try:
        return _dispatch(args, t0)
    except (corner.AccuracyFailure, analytic.BudgetExceededError) as exc:
        record = {"error": type(exc).__name__, "message": str(exc)}
        if isinstance(exc, corner.AccuracyFailure):
            record["estimates"] = list(exc.estimates)
        else:
            record["probability"] = exc.result.probability
            record["standard_error"] = exc.result.standard_error
        print(json.dumps(record, sort_keys=True))
        return 1


def _dispatch(args, t0: float) -> int:
    cmd = args.command

    if cmd == "gen":
        if args.grid is not None:
            ps, params = make_grid(args.grid), {"grid": args.grid}
        else:
            ps, params = make_polygon(args.poly), {"poly": args.poly}
        params.update({"perturb": args.perturb, "scale": args.scale})
        if args.perturb:
            pp = PerturbationParams.for_point_set(ps, args.scale)
            ps = perturb(ps, pp, SeedSpec(args.seed))
        report = {
            "type": "points",
            "kind": ps.kind,
            "param": ps.param,
            "points": [
                {"label": k, "x": p[0], "y": p[1]}
                for k, p in enumerate(ps.points, start=1)
            ],
        }
        base = args.out if args.out is not None else "points"
        manifest = _manifest(args, cmd, params, t0)
        paths = write_report(report, manifest, base, formats=("json", "csv"), svg=args.svg)
        for p in paths:
            print(p)
        return 0

    if cmd == "sim-grid":
        rep = simulate.estimate_grid_distribution(
            args.m, args.iters, args.seed, workers=args.threads, top_k=args.top_k
        )
        name = f"sim-grid-m{args.m}"
        params = {"m": args.m, "iters": args.iters, "top_k": args.top_k}
        _emit(args, name, rep.to_dict(), _manifest(args, cmd, params, t0, rep.discards))
        return 0

    if cmd == "sim-poly":
        rep = simulate.estimate_polygon_distribution(
            args.n, args.iters, args.seed, workers=args.threads, top_k=args.top_k
        )
        name = f"sim-poly-n{args.n}"
        params = {"n": args.n, "iters": args.iters, "top_k": args.top_k}
        _emit(args, name, rep.to_dict(), _manifest(args, cmd, params, t0, rep.discards))
        return 0

    if cmd == "tri-freq":
        rep = simulate.estimate_triangle_frequencies(
            args.n, args.iters, args.seed, workers=args.threads
        )
        name = f"tri-freq-n{args.n}"
        params = {"n": args.n, "iters": args.iters}
        _emit(args, name, rep.to_dict(), _manifest(args, cmd, params, t0, rep.discards))
        return 0

    if cmd == "analytic-grid2":
        dist = analytic.grid2_distribution(args.target_se, seed=args.seed)
        report = {
            "type": "analytic-distribution",
            "kind": "grid",
            "param": 2,
            "entries": [
                {
                    "code": code.key(),
                    "rows": list(code.rows),
                    "probability": r.probability,
                    "standard_error": r.standard_error,
                    "method": r.method,
                }
                for code, r in dist
            ],
        }
        params = {"target_se": args.target_se}
        _emit(args, "analytic-grid2", report, _manifest(args, cmd, params, t0))
        return 0

    if cmd == "analytic-poly":
        dist = analytic.polygon_distribution(args.n, args.target_se, seed=args.seed)
        report = {
            "type": "analytic-distribution",
            "kind": "polygon",
            "param": args.n,
            "entries": [
                {
                    "code": code.key(),
                    "diagonals": [list(d) for d in code.diagonals],
                    "probability": r.probability,
                    "standard_error": r.standard_error,
                    "method": r.method,
                }
                for code, r in dist
            ],
        }
        params = {"n": args.n, "target_se": args.target_se}
        _emit(args, f"analytic-poly-n{args.n}", report, _manifest(args, cmd, params, t0))
        return 0

    if cmd == "walk":
        stats = largegrid.walk_statistics(
            _MODELS[args.model],
            args.walks,
            args.cap,
            args.seed,
            m=args.m,
            workers=args.threads,
        )
        params = {"model": _MODELS[args.model], "walks": args.walks, "cap": args.cap, "m": stats.m}
        _emit(args, f"walk-{args.model}", stats.to_dict(), _manifest(args, cmd, params, t0, stats.discards))
        return 0

    if cmd == "census":
        rep = largegrid.component_census(
            args.m, args.iters, _MODELS[args.model], args.seed, workers=args.threads
        )
        params = {"m": args.m, "iters": args.iters, "model": _MODELS[args.model]}
        _emit(args, f"census-{args.model}-m{args.m}", rep.to_dict(), _manifest(args, cmd, params, t0, rep.discards))
        return 0

    if cmd == "corner":
        ns = [int(v) for v in str(args.n).split(",")]
        if len(ns) > 1:
            mc = None
            if args.mc_iters > 0:
                mc = {
                    n: simulate.estimate_triangle_frequencies(
                        n, args.mc_iters, args.seed, workers=args.threads
                    ).frequency_of((1, 2, 3))
                    for n in ns
                }
            rows = corner.corner_table(ns, tol=args.tol, mc=mc)
            report = {"type": "corner-table", "rows": rows}
            params = {"n": ns, "tol": args.tol, "mc_iters": args.mc_iters}
            _emit(args, "corner-table", report, _manifest(args, cmd, params, t0))
            return 0
        try:
            spec = corner.CornerIntegralSpec(n=ns[0], nodes=args.nodes)
            est = corner.corner_probability(spec, tol=args.tol)
        except ValueError as exc:  # parameter domain / feasibility bound
            print(json.dumps({"error": "QuadratureInfeasible", "message": str(exc)}, sort_keys=True))
            return 1
        params = {"n": ns[0], "nodes": args.nodes, "tol": args.tol}
        _emit(args, f"corner-n{ns[0]}", est.to_dict(), _manifest(args, cmd, params, t0))
        return 0

    if cmd == "report":
        with open(args.input) as fh:
            payload = json.load(fh)
        report = {k: v for k, v in payload.items() if k != "manifest"}
        base = args.out if args.out is not None else os.path.splitext(args.input)[0]
        write_csv(report, str(base) + ".csv")
        print(str(base) + ".csv")
        if args.svg:
            write_figure(report, str(base) + ".svg")
            print(str(base) + ".svg")
        return 0

    raise AssertionError(f"unhandled command {cmd}")


if __name__ == "__main__":
    sys.exit(main())
