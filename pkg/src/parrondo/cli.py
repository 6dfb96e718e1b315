"""Command-line interface.

Tabular results go out as CSV (header row, shortest round-trip floats),
structured ones as JSON.  Every file written with ``--out`` gets a
``<file>.manifest.json`` next to it recording what produced it; ``rerun``
replays a manifest.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from datetime import datetime, timezone

from . import __version__
from .core import GameParams, SolverError, ThresholdMode, current, p_win, stationary
from .fairness import FairnessQuery, fair_pb2_closed, fair_pb2_numeric
from .montecarlo import SimConfig, simulate
from .original import OriginalParams, original_current, original_stationary, original_sweep
from .scan import (
    CLASSIFY_TOL,
    MAP_GRID,
    SWEEP_GRID,
    fair_surface_fixed_pb1,
    find_inversion,
    inversion_curve_fixed_gamma,
    region_map,
)

EXIT_USAGE = 2
EXIT_SOLVER = 3

SCHEMAS = {
    "solve": ("solve/v1", ["state", "probability"]),
    "sweep": ("sweep/v1", ["gamma", "current"]),
    "fair": ("fair/v1", ["n", "pb1", "pb3", "method", "pb2", "residual"]),
    "region": ("region/v1", ["gamma", "pb1", "pb3", "pb2", "current", "label"]),
    "fair-surface": ("fair-surface/v1", ["n", "pb1", "pb2", "pb3"]),
    "inversion-curve": ("inversion-curve/v1", ["n", "gamma", "pb1", "pb3", "branch"]),
    "original": ("original/v1", ["gamma", "current"]),
}


class UsageError(Exception):
    pass


def fmt(x):
    if isinstance(x, float):
        if math.isnan(x):
            return "nan"
        return repr(float(x))
    return str(x)


def _prob_list(text, count=None):
    try:
        values = [float(v) for v in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")
    if count is not None and len(values) != count:
        raise argparse.ArgumentTypeError(f"expected {count} values, got {len(values)}")
    return values


def _pb(text):
    return tuple(_prob_list(text, 3))


def _int_list(text):
    try:
        return [int(v) for v in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _game_args(p, gamma=True):
    p.add_argument("--n", type=int, required=True, help="number of players")
    p.add_argument("--pa", type=float, default=0.5, help="win probability of game A")
    p.add_argument("--pb", type=_pb, default=(0.5, 0.5, 0.5),
                   help="game B probabilities p1,p2,p3 (upper, middle, lower band)")
    if gamma:
        p.add_argument("--gamma", type=float, default=0.0, help="probability of playing game A")
    p.add_argument("--threshold-mode", choices=["raw", "nearest"], default="raw")


def _output_args(p, formats=("csv", "json")):
    p.add_argument("--out", help="write output to FILE (plus FILE.manifest.json)")
    p.add_argument("--format", choices=formats, default=formats[0])


def build_parser():
    parser = argparse.ArgumentParser(prog="parrondo", description="Collective Parrondo games")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="stationary distribution, p_win and current")
    _game_args(p)
    _output_args(p)

    p = sub.add_parser("sweep", help="current as a function of gamma, with inversion roots")
    _game_args(p, gamma=False)
    p.add_argument("--grid", type=int, default=SWEEP_GRID)
    _output_args(p)

    p = sub.add_parser("fair", help="middle-band probability making game B fair")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--pb1", type=float, required=True)
    p.add_argument("--pb3", type=float, required=True)
    p.add_argument("--tol", type=float, default=1e-12)
    p.add_argument("--method", choices=["closed", "numeric", "both"], default="both")
    _output_args(p)

    p = sub.add_parser("scan", help="region maps and fair/inversion curves")
    scans = p.add_subparsers(dest="scan", required=True)
    s = scans.add_parser("region", help="fair/winning/losing labels on a (gamma, p1, p3) grid")
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--grid", type=int, default=MAP_GRID, help="nodes per free axis")
    s.add_argument("--gamma", type=float, help="fix gamma instead of scanning it")
    s.add_argument("--pb1", type=float, help="fix p1 instead of scanning it")
    s.add_argument("--pb3", type=float, help="fix p3 instead of scanning it")
    s.add_argument("--tol", type=float, default=CLASSIFY_TOL, help="classification tolerance on |J|")
    s.add_argument("--pa", type=float, default=0.5)
    s.add_argument("--threshold-mode", choices=["raw", "nearest"], default="raw")
    _output_args(s, ("csv",))
    s = scans.add_parser("fair-surface", help="fair (p2, p3) curve at fixed p1")
    s.add_argument("--n", type=_int_list, required=True, help="one or more N, comma separated")
    s.add_argument("--pb1", type=float, required=True)
    s.add_argument("--grid", type=int, default=MAP_GRID)
    s.add_argument("--threshold-mode", choices=["raw", "nearest"], default="raw")
    _output_args(s, ("csv",))
    s = scans.add_parser("inversion-curve", help="zero set of J(A+B) in (p1, p3) at fixed gamma")
    s.add_argument("--n", type=_int_list, required=True, help="one or more N, comma separated")
    s.add_argument("--gamma", type=float, required=True)
    s.add_argument("--grid", type=int, default=MAP_GRID)
    s.add_argument("--pa", type=float, default=0.5)
    s.add_argument("--threshold-mode", choices=["raw", "nearest"], default="raw")
    _output_args(s, ("csv",))

    p = sub.add_parser("simulate", help="Monte Carlo estimate of the current")
    _game_args(p)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--rounds", type=int, default=10**6)
    p.add_argument("--burn-in", type=int, default=None)
    p.add_argument("--initial", default="all-losers",
                   help="'all-losers', 'all-winners' or a 0/1 string with one flag per player")
    _output_args(p, ("json",))

    p = sub.add_parser("original", help="original capital-mod-3 games")
    p.add_argument("--epsilon", type=float, default=0.0)
    p.add_argument("--gamma", type=float, default=0.0)
    p.add_argument("--sweep", action="store_true", help="also sweep gamma and check for inversion")
    p.add_argument("--grid", type=int, default=SWEEP_GRID)
    _output_args(p, ("json", "csv"))

    p = sub.add_parser("rerun", help="replay the command recorded in a manifest")
    p.add_argument("manifest")
    return parser


def _params(args):
    return GameParams(args.n, args.pb, getattr(args, "gamma", 0.0), args.pa,
                      ThresholdMode.parse(args.threshold_mode))


def _csv_text(header, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([fmt(x) for x in row])
    return buf.getvalue()


def _manifest(argv, kind, parameters, **extra):
    schema = SCHEMAS.get(kind, (f"{kind}/v1", None))[0]
    m = {
        "tool": "parrondo",
        "tool_version": __version__,
        "command": list(argv),
        "schema": schema,
        "parameters": parameters,
        "timestamp": datetime.now(timezone.utc).isoformat(timespec="seconds"),
    }
    m.update(extra)
    return m


def _emit(args, text, manifest, stdout):
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        with open(args.out + ".manifest.json", "w", encoding="utf-8") as fh:
            json.dump(manifest, fh, indent=2)
            fh.write("\n")
    else:
        stdout.write(text)


def _json_text(obj):
    return json.dumps(obj, indent=2, allow_nan=True) + "\n"


def _param_dict(params):
    return {"n": params.n_players, "pa": params.p_a, "pb": list(params.p_b),
            "gamma": params.gamma, "threshold_mode": params.threshold_mode.value}


def cmd_solve(args, argv, out, err):
    params = _params(args)
    dist = stationary(params)
    pw, j = p_win(params), current(params)
    manifest = _manifest(argv, "solve", _param_dict(params), results={"p_win": pw, "current": j})
    if args.format == "json":
        text = _json_text({"stationary": dist.tolist(), "p_win": pw, "current": j,
                           "manifest": manifest})
    else:
        text = _csv_text(SCHEMAS["solve"][1], enumerate(dist.tolist()))
    _emit(args, text, manifest, out)
    if args.format == "csv":
        print(f"p_win = {fmt(pw)}\nJ = {fmt(j)}", file=err if not args.out else out)


def cmd_sweep(args, argv, out, err):
    params = _params(args)
    inv = find_inversion(params, args.grid)
    sw = inv.sweep
    extrema = [{"gamma": e.gamma, "current": e.current, "between": [e.lo, e.hi]} for e in inv.extrema]
    manifest = _manifest(argv, "sweep", _param_dict(params), grid=args.grid,
                         results={"roots": inv.roots, "extrema": extrema})
    if args.format == "json":
        text = _json_text({"gamma": sw.gammas.tolist(), "current": sw.currents.tolist(),
                           "roots": inv.roots, "extrema": extrema, "manifest": manifest})
    else:
        text = _csv_text(SCHEMAS["sweep"][1], sw.points)
    _emit(args, text, manifest, out)
    if args.format == "csv":
        stream = out if args.out else err
        print("roots: " + (", ".join(fmt(r) for r in inv.roots) or "none"), file=stream)


def cmd_fair(args, argv, out, err):
    q = FairnessQuery(args.n, args.pb1, args.pb3, args.tol)
    rows = []
    if args.method in ("closed", "both") and args.n in (2, 3, 4, 5):
        try:
            v = fair_pb2_closed(q)
            rows.append(("closed", v))
        except SolverError as exc:
            if args.method == "closed":
                raise
            print(f"closed form: {exc}", file=err)
    elif args.method == "closed":
        fair_pb2_closed(q)  # raises with the unsupported-N message
    if args.method in ("numeric", "both"):
        rows.extend(("numeric", v) for v in fair_pb2_numeric(q))
    table = []
    for method, v in rows:
        res = current(GameParams(args.n, (args.pb1, v, args.pb3)))
        table.append((args.n, args.pb1, args.pb3, method, v, res))
    manifest = _manifest(argv, "fair", {"n": args.n, "pb1": args.pb1, "pb3": args.pb3,
                                        "tol": args.tol, "method": args.method})
    if args.format == "json":
        text = _json_text({"solutions": [dict(zip(SCHEMAS["fair"][1], r)) for r in table],
                           "manifest": manifest})
    else:
        text = _csv_text(SCHEMAS["fair"][1], table)
    _emit(args, text, manifest, out)


def cmd_scan(args, argv, out, err):
    mode = ThresholdMode.parse(args.threshold_mode)
    if args.scan == "region":
        axes = {k: (getattr(args, k) if getattr(args, k) is not None else args.grid)
                for k in ("gamma", "pb1", "pb3")}
        points = region_map(args.n, axes["gamma"], axes["pb1"], axes["pb3"], tol=args.tol,
                            mode=mode, p_a=args.pa)
        rows = [(p.gamma, p.pb1, p.pb3, p.pb2, p.current, p.label) for p in points]
        params = {"n": args.n, "pa": args.pa, "tol": args.tol, **{k: getattr(args, k) for k in axes}}
    elif args.scan == "fair-surface":
        points = fair_surface_fixed_pb1(args.n, args.pb1, args.grid, mode=mode)
        rows = [(p.n, p.pb1, p.pb2, p.pb3) for p in points]
        params = {"n": args.n, "pb1": args.pb1}
    else:
        rows = []
        for n in args.n:
            pts = inversion_curve_fixed_gamma(n, args.gamma, args.grid, args.grid, mode=mode, p_a=args.pa)
            rows.extend((p.n, p.gamma, p.pb1, p.pb3, p.branch) for p in pts)
        params = {"n": args.n, "gamma": args.gamma, "pa": args.pa}
    params["threshold_mode"] = mode.value
    manifest = _manifest(argv, args.scan, params, grid=args.grid, rows=len(rows))
    _emit(args, _csv_text(SCHEMAS[args.scan][1], rows), manifest, out)


def _initial(text, n):
    if text in ("all-losers", "all-winners"):
        return text
    if set(text) <= {"0", "1"} and len(text) == n:
        return [c == "1" for c in text]
    raise UsageError(f"--initial must be all-losers, all-winners or {n} 0/1 flags")


def cmd_simulate(args, argv, out, err):
    params = _params(args)
    config = SimConfig(args.seed, args.rounds, args.burn_in, _initial(args.initial, args.n))
    report = simulate(params, config)
    exact = current(params)
    manifest = _manifest(argv, "simulate", _param_dict(params), seed=args.seed,
                         rounds=args.rounds, burn_in=report.metadata["burn_in"],
                         rng=report.metadata["rng"], numpy_version=report.metadata["numpy_version"])
    text = _json_text({"report": report.to_dict(), "exact_current": exact, "manifest": manifest})
    _emit(args, text, manifest, out)


def cmd_original(args, argv, out, err):
    op = OriginalParams(args.epsilon, args.gamma)
    pi = [float(x) for x in original_stationary(op)]
    j = float(original_current(op))
    result = {"epsilon": args.epsilon, "gamma": args.gamma, "stationary": pi, "current": j}
    rows = []
    if args.sweep:
        gs, js = original_sweep(args.epsilon, args.grid)
        rows = list(zip(gs.tolist(), js.tolist()))
        result.update(
            no_inversion=bool((js >= -1e-12).all()),
            endpoint_currents=[float(js[0]), float(js[-1])],
            max_current=float(js.max()),
            argmax_gamma=float(gs[js.argmax()]),
        )
    manifest = _manifest(argv, "original", {"epsilon": args.epsilon, "gamma": args.gamma,
                                            "sweep": args.sweep, "grid": args.grid},
                         results=result)
    if args.format == "csv":
        if not args.sweep:
            raise UsageError("--format csv needs --sweep")
        text = _csv_text(SCHEMAS["original"][1], rows)
    else:
        if args.sweep:
            result["sweep"] = {"gamma": [r[0] for r in rows], "current": [r[1] for r in rows]}
        text = _json_text({**result, "manifest": manifest})
    _emit(args, text, manifest, out)


def cmd_rerun(args, argv, out, err):
    with open(args.manifest, encoding="utf-8") as fh:
        recorded = json.load(fh)
    return main(recorded["command"], out, err)


COMMANDS = {
    "solve": cmd_solve,
    "sweep": cmd_sweep,
    "fair": cmd_fair,
    "scan": cmd_scan,
    "simulate": cmd_simulate,
    "original": cmd_original,
    "rerun": cmd_rerun,
}


def main(argv=None, out=None, err=None):
    argv = list(sys.argv[1:] if argv is None else argv)
    out = out or sys.stdout
    err = err or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code
    try:
        return COMMANDS[args.command](args, argv, out, err) or 0
    except SolverError as exc:
        print(f"error: {exc}", file=err)
        return EXIT_SOLVER
    except (UsageError, ValueError, IndexError, OSError) as exc:
        print(f"error: {exc}", file=err)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
