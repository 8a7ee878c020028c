"""Command-line frontend.

Subcommands: classify, equilibria, linearize, integrate, shoot, portrait,
verify, barriers.  Every command reads the problem parameters from flags
(-N, -p, -q, -M), optionally seeded from a JSON config file; explicit flags
override the config, which overrides defaults.  Artifacts are written
atomically with 17-significant-digit floats; report paths also render PNG
figures next to the delimited output.

Exit codes: 0 success, 2 usage error, 3 regime/precondition error,
4 numerical failure.  Errors are mirrored as a JSON object on stderr.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys

import numpy as np

from . import equilibria as eqmod
from . import portrait as portmod
from . import profiles as profmod
from .charts import integrate_chart
from .errors import NumericalError, RegimeError
from .orbits import shoot_connection
from .params import ProblemParams, compute_exponents
from .regime import classify_regime
from .serialize import (dumps, profile_csv_rows, trajectory_csv_rows, write_csv,
                        write_json, write_text_atomic)
from .verification import run_suite

EXIT_USAGE = 2
EXIT_REGIME = 3
EXIT_NUMERICAL = 4


def _err(kind, message):
    sys.stderr.write(dumps({"error": {"kind": kind, "message": str(message)}}) + "\n")


def build_parser():
    top = argparse.ArgumentParser(prog="pqradial", description=__doc__.split("\n")[0])
    sub = top.add_subparsers(dest="command")

    def add_common(sp, mass_default=None):
        sp.add_argument("-N", type=float, default=None, help="spatial dimension (>= 1)")
        sp.add_argument("-p", type=float, default=None, help="absorption exponent (> 1)")
        sp.add_argument("-q", type=float, default=None, help="gradient exponent (> 1)")
        sp.add_argument("-M", type=float, default=None, help="gradient coefficient")
        sp.add_argument("--config", default=None, help="JSON file with defaults")
        sp.add_argument("--out", default=".", help="output directory")

    sp = sub.add_parser("classify", help="regime report for one parameter set")
    add_common(sp)

    sp = sub.add_parser("equilibria", help="constant solutions and fixed points")
    add_common(sp)

    sp = sub.add_parser("linearize", help="spectrum at an equilibrium")
    add_common(sp)
    sp.add_argument("--point", default=None,
                    help="planar point 'x,y' (default: every constant solution + origin)")
    sp.add_argument("--order3", action="store_true",
                    help="linearize the desingularized order-3 system instead")

    sp = sub.add_parser("integrate", help="integrate a chart flow")
    add_common(sp)
    sp.add_argument("--chart", default="planar_W4")
    sp.add_argument("--initial", required=False, default=None,
                    help="comma-separated initial state")
    sp.add_argument("--t0", type=float, default=0.0)
    sp.add_argument("--t1", type=float, default=10.0)
    sp.add_argument("--rtol", type=float, default=None)
    sp.add_argument("--atol", type=float, default=None)

    sp = sub.add_parser("shoot", help="heteroclinic connection between two equilibria")
    add_common(sp)
    sp.add_argument("--source", default="origin",
                    help="'origin' or an index into the constant-solution list")
    sp.add_argument("--target", default="0",
                    help="'origin' or an index into the constant-solution list")
    sp.add_argument("--tol-connect", type=float, default=1e-6)

    sp = sub.add_parser("portrait", help="vanishing curves, regions and field export")
    add_common(sp)
    sp.add_argument("--bbox", default=None, help="xmin,xmax,ymin,ymax")
    sp.add_argument("--grid", type=int, default=40)

    sp = sub.add_parser("verify", help="run the acceptance suite")
    sp.add_argument("--suite", default="all", help="'all' or a criterion prefix like 06")
    sp.add_argument("--out", default=None, help="also write a JSON report here")

    sp = sub.add_parser("barriers", help="certify the barrier families")
    add_common(sp)
    sp.add_argument("--family", default=None,
                    help="one family (default: every family valid for the parameters)")
    return top


def _params_from(args) -> ProblemParams:
    cfg = {}
    if getattr(args, "config", None):
        with open(args.config) as fh:
            cfg = json.load(fh)
    vals = {}
    for key in ("N", "p", "q", "M"):
        flag = getattr(args, key, None)
        if flag is not None:
            vals[key] = flag
        elif key in cfg:
            vals[key] = float(cfg[key])
    missing = [k for k in ("N", "p", "q") if k not in vals]
    if missing:
        raise UsageError(f"missing required parameter(s): {', '.join(missing)}")
    vals.setdefault("M", 0.0)
    return ProblemParams(**vals)


class UsageError(Exception):
    pass


def _outpath(args, name):
    os.makedirs(args.out, exist_ok=True)
    return os.path.join(args.out, name)


def cmd_classify(args):
    pp = _params_from(args)
    report = classify_regime(pp)
    path = _outpath(args, "classify.json")
    write_json(path, report.to_dict())
    print(dumps(report.to_dict()))
    return 0


def cmd_equilibria(args):
    pp = _params_from(args)
    out = {"params": pp.to_dict(), "fixed_points": eqmod.fixed_points(pp)}
    try:
        out["constant_solutions"] = eqmod.find_constant_solutions(pp).to_dict()
    except RegimeError:
        out["constant_solutions"] = None
    path = _outpath(args, "equilibria.json")
    write_json(path, out)
    print(dumps(out))
    return 0


def cmd_linearize(args):
    pp = _params_from(args)
    reports = []
    if args.order3:
        reports.append(eqmod.linearize_order3(pp))
    elif args.point is not None:
        pt = tuple(float(v) for v in args.point.split(","))
        reports.append(eqmod.linearize_planar(pt, pp))
    else:
        e = compute_exponents(pp)
        reports.append(eqmod.linearize_planar((0.0, 0.0), pp))
        for x in eqmod.find_constant_solutions(pp).roots:
            reports.append(eqmod.linearize_planar((x, e.alpha * x), pp))
    out = [r.to_dict() for r in reports]
    write_json(_outpath(args, "linearize.json"), out)
    print(dumps(out))
    return 0


def cmd_integrate(args):
    pp = _params_from(args)
    if args.initial is None:
        raise UsageError("--initial is required for integrate")
    y0 = tuple(float(v) for v in args.initial.split(","))
    traj = integrate_chart(args.chart, y0, args.t0, args.t1, pp,
                           rtol=args.rtol, atol=args.atol)
    header, rows = trajectory_csv_rows(traj)
    write_csv(_outpath(args, "trajectory.csv"), header, rows)
    write_json(_outpath(args, "trajectory.json"), traj.to_dict())
    from .report import render_trajectory
    render_trajectory(traj, _outpath(args, "trajectory.png"))
    print(dumps({"event": traj.event.to_dict(), "n_points": len(traj.times),
                 "files": ["trajectory.csv", "trajectory.json", "trajectory.png"]}))
    return 0


def _pick_equilibrium(which, pp):
    e = compute_exponents(pp)
    if which == "origin":
        return eqmod.linearize_planar((0.0, 0.0), pp)
    roots = eqmod.find_constant_solutions(pp).roots
    idx = int(which)
    if not (0 <= idx < len(roots)):
        raise UsageError(f"equilibrium index {idx} out of range (have {len(roots)} roots)")
    return eqmod.linearize_planar((roots[idx], e.alpha * roots[idx]), pp)


def cmd_shoot(args):
    pp = _params_from(args)
    src = _pick_equilibrium(args.source, pp)
    tgt = _pick_equilibrium(args.target, pp)
    res = shoot_connection(src, tgt, pp, tol_connect=args.tol_connect)
    write_json(_outpath(args, "shoot.json"), res.to_dict())
    from .report import render_shoot
    render_shoot(res, _outpath(args, "shoot.png"))
    print(dumps({"success": res.success, "terminal_distance": res.terminal_distance,
                 "method": res.method, "message": res.message,
                 "files": ["shoot.json", "shoot.png"]}))
    return 0


def cmd_portrait(args):
    pp = _params_from(args)
    if args.bbox:
        bbox = tuple(float(v) for v in args.bbox.split(","))
        if len(bbox) != 4:
            raise UsageError("--bbox needs xmin,xmax,ymin,ymax")
    else:
        roots = eqmod.find_constant_solutions(pp).roots
        e = compute_exponents(pp)
        span = max([e.alpha * x for x in roots] + [1.0]) * 2.5
        bbox = (0.0, span, -span / 2.0, span)
    grid = portmod.field_grid(pp, bbox, resolution=args.grid)
    write_csv(_outpath(args, "field.csv"), ["x", "y", "H1", "H2", "region"],
              list(grid.to_rows()))
    write_json(_outpath(args, "portrait.json"), grid.rmap.to_dict())
    from .report import PORTRAIT_SCRIPT, render_portrait
    write_text_atomic(_outpath(args, "plot_portrait.py"), PORTRAIT_SCRIPT)
    render_portrait(grid, _outpath(args, "portrait.png"))
    print(dumps({"case": grid.rmap.case, "n_points": len(grid.points),
                 "equilibria": [list(pt) for pt in grid.rmap.equilibria],
                 "files": ["field.csv", "portrait.json", "plot_portrait.py",
                           "portrait.png"]}))
    return 0


def cmd_verify(args):
    results = run_suite(args.suite)
    if not results:
        raise UsageError(f"no criteria match suite filter {args.suite!r}")
    for r in results:
        print(r.line())
    if args.out:
        write_json(args.out, [r.to_dict() for r in results])
    n_fail = sum(1 for r in results if not r.passed)
    print(f"{len(results) - n_fail}/{len(results)} criteria passed")
    return 0 if n_fail == 0 else 1


def cmd_barriers(args):
    pp = _params_from(args)
    families = [args.family] if args.family else \
        ["eikonal_sub", "eikonal_super", "riccati_sub", "emden_super", "weak_super"]
    certs = {}
    for fam in families:
        try:
            certs[fam] = profmod.barrier(fam, pp).to_dict()
        except RegimeError as exc:
            if args.family:
                raise
            certs[fam] = {"skipped": str(exc)}
    write_json(_outpath(args, "barriers.json"), certs)
    print(dumps(certs))
    return 0


COMMANDS = {
    "classify": cmd_classify,
    "equilibria": cmd_equilibria,
    "linearize": cmd_linearize,
    "integrate": cmd_integrate,
    "shoot": cmd_shoot,
    "portrait": cmd_portrait,
    "verify": cmd_verify,
    "barriers": cmd_barriers,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits with 2 on usage errors and 0 on --help
        return int(exc.code) if exc.code else 0
    if args.command not in COMMANDS:
        _err("usage", f"unknown or missing subcommand; valid: {sorted(COMMANDS)}")
        return EXIT_USAGE
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        _err("usage", exc)
        return EXIT_USAGE
    except RegimeError as exc:
        _err("regime", exc)
        return EXIT_REGIME
    except NumericalError as exc:
        _err("numerical", exc)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
