"""Command line entry point: ``vortex-plateau <command> [options]``."""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from dataclasses import replace
from pathlib import Path

from .analysis import BracketError, SweepError, sweep, threshold_bisect, vortex_relaxed_area
from .discretization import export_obj
from .inner_solver import InnerSolverError
from .outer_optimizer import OptimizerConfig, OuterSolverError, minimize_over_profiles
from .plateau import CatenoidError, build_gamma, compare_with_nonparametric, solve_plateau

log = logging.getLogger("vortex_plateau")

SOLVER_ERRORS = (InnerSolverError, OuterSolverError, BracketError, SweepError, CatenoidError, RuntimeError)


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


def _positive(kind):
    def conv(text):
        val = kind(text)
        if val <= 0:
            raise argparse.ArgumentTypeError(f"must be positive: {text}")
        return val

    return conv


def _add_grid(p, n1=64, n2=64):
    p.add_argument("--n1", type=_positive(int), default=None, help=f"columns (default {n1})")
    p.add_argument("--n2", type=_positive(int), default=None, help=f"rows (default {n2})")


def _add_config(p):
    p.add_argument("--config", type=Path, help="JSON file with optimizer options (and optional n1, n2)")
    p.add_argument("--jobs", type=_positive(int), default=None, help="parallel multistart branches")
    p.add_argument("--inner-tol", type=_positive(float), default=None)
    p.add_argument("--reduced-dim", type=_positive(int), default=None)
    p.add_argument("--starts", default=None, help="comma separated start names (flat, ellipse)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="vortex-plateau", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("solve", help="minimize the doubled functional at one l")
    p.add_argument("--l", type=_positive(float), required=True)
    _add_grid(p)
    _add_config(p)
    p.add_argument("--out", type=Path, default=None, help="report JSON (default solve_l<l>.json)")
    p.add_argument("--obj", type=Path, default=None, help="OBJ of the minimal graph")

    p = sub.add_parser("sweep", help="warm-started sweep over l")
    p.add_argument("--lmin", type=_positive(float), required=True)
    p.add_argument("--lmax", type=_positive(float), required=True)
    p.add_argument("--steps", type=_positive(int), required=True)
    p.add_argument("--out", type=Path, default=Path("sweep.csv"))
    p.add_argument("--no-timing", action="store_true", help="write 0 seconds for byte-identical reruns")
    _add_grid(p)
    _add_config(p)

    p = sub.add_parser("threshold", help="bisect the connected/degenerate switch")
    p.add_argument("--lo", type=_positive(float), default=0.5)
    p.add_argument("--hi", type=_positive(float), default=4.0)
    p.add_argument("--tol", type=_positive(float), default=0.02)
    p.add_argument("--out", type=Path, default=Path("threshold.json"))
    _add_grid(p)
    _add_config(p)

    p = sub.add_parser("vortex", help="relaxed area of the vortex map graph over the disc of radius l")
    p.add_argument("--l", type=_positive(float), required=True)
    p.add_argument("--out", type=Path, default=None)
    _add_grid(p)
    _add_config(p)

    p = sub.add_parser("plateau", help="parametric disc spanning the two-circle curve")
    p.add_argument("--l", type=_positive(float), required=True)
    p.add_argument("--refine", type=_positive(int), default=256, help="boundary vertices")
    p.add_argument("--iters", type=_positive(int), default=500)
    p.add_argument("--out", type=Path, default=None, help="OBJ of the surface (default plateau_l<l>.obj)")

    p = sub.add_parser("crosscheck", help="parametric vs. graph minimum")
    p.add_argument("--l", type=_positive(float), required=True)
    p.add_argument("--refine", type=_positive(int), default=None, help="boundary vertices (overrides --triangles)")
    p.add_argument("--triangles", type=_positive(int), default=10_000, help="target disc mesh size")
    p.add_argument("--iters", type=_positive(int), default=500)
    p.add_argument("--out", type=Path, default=None)
    _add_grid(p)
    _add_config(p)
    return parser


def resolve_config(args) -> tuple[OptimizerConfig, int, int]:
    """Config file first, then explicit flags."""
    data = {}
    if getattr(args, "config", None) is not None:
        try:
            data = json.loads(args.config.read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read config {args.config}: {exc}") from exc
    n1 = data.pop("n1", 64)
    n2 = data.pop("n2", 64)
    try:
        cfg = OptimizerConfig.from_json(data)
    except (TypeError, ValueError) as exc:
        raise UsageError(str(exc)) from exc
    over = {}
    if getattr(args, "jobs", None) is not None:
        over["jobs"] = args.jobs
    if getattr(args, "inner_tol", None) is not None:
        over["inner_tol"] = args.inner_tol
    if getattr(args, "reduced_dim", None) is not None:
        over["reduced_dim"] = args.reduced_dim
    if getattr(args, "starts", None):
        over["starts"] = tuple(s.strip() for s in args.starts.split(",") if s.strip())
    cfg = replace(cfg, **over)
    n1 = args.n1 if getattr(args, "n1", None) is not None else n1
    n2 = args.n2 if getattr(args, "n2", None) is not None else n2
    if n1 % 2:
        raise UsageError("--n1 must be even")
    return cfg, int(n1), int(n2)


def _write_json(path: Path, data: dict) -> None:
    path.write_text(json.dumps(data, indent=2) + "\n")


def cmd_solve(args) -> str:
    cfg, n1, n2 = resolve_config(args)
    report = minimize_over_profiles(args.l, n1, n2, cfg)
    out = args.out or Path(f"solve_l{args.l:g}.json")
    _write_json(out, report.to_json())
    if args.obj is not None and report.best_psi is not None:
        export_obj(args.obj, report.best_psi.mesh, report.best_psi)
    return f"l={args.l:g} value={report.value:.10f} degenerate={str(report.degenerate).lower()} -> {out}"


def cmd_sweep(args) -> str:
    cfg, n1, n2 = resolve_config(args)
    if args.lmin > args.lmax:
        raise UsageError("--lmin must not exceed --lmax")
    recs = sweep(args.lmin, args.lmax, args.steps, cfg, n1, n2, out=args.out, timing=not args.no_timing)
    ndeg = sum(r.degenerate for r in recs)
    return f"{len(recs)} points, {ndeg} degenerate -> {args.out}"


def cmd_threshold(args) -> str:
    cfg, n1, n2 = resolve_config(args)
    res = threshold_bisect(args.lo, args.hi, args.tol, cfg, n1, n2)
    _write_json(args.out, res.to_json())
    return f"threshold in [{res.lo:.6f}, {res.hi:.6f}] midpoint {res.midpoint:.6f} -> {args.out}"


def cmd_vortex(args) -> str:
    cfg, n1, n2 = resolve_config(args)
    res = vortex_relaxed_area(args.l, cfg, n1, n2)
    out = args.out or Path(f"vortex_l{args.l:g}.json")
    _write_json(out, res.to_json())
    return f"l={args.l:g} ac_part={res.ac_part:.10f} singular_part={res.singular_part:.10f} total={res.total:.10f} -> {out}"


def cmd_plateau(args) -> str:
    res = solve_plateau(build_gamma(args.l, max(64, 4 * args.refine)), refine=args.refine, iters=args.iters)
    out = args.out or Path(f"plateau_l{args.l:g}.obj")
    res.mesh.export_obj(out)
    return (
        f"l={args.l:g} area={res.area:.10f} half={res.area / 2:.10f} "
        f"degenerate={str(res.degenerate).lower()} pinched={str(res.pinched).lower()} -> {out}"
    )


def cmd_crosscheck(args) -> str:
    cfg, n1, n2 = resolve_config(args)
    rec = compare_with_nonparametric(
        args.l, n1, n2, refine=args.refine, iters=args.iters, cfg=cfg, triangles=args.triangles
    )
    out = args.out or Path(f"crosscheck_l{args.l:g}.json")
    _write_json(out, rec.to_json())
    return (
        f"l={args.l:g} parametric={rec.half_area_parametric:.8f} graph={rec.min_F2l:.8f} "
        f"rel_gap={rec.rel_gap:.3e} triangles={rec.triangles} -> {out}"
    )


COMMANDS = {
    "solve": cmd_solve,
    "sweep": cmd_sweep,
    "threshold": cmd_threshold,
    "vortex": cmd_vortex,
    "plateau": cmd_plateau,
    "crosscheck": cmd_crosscheck,
}


def main(argv: list[str] | None = None) -> int:
    level = os.environ.get("VORTEX_PLATEAU_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING), format="%(levelname)s %(name)s: %(message)s")
    try:
        args = build_parser().parse_args(argv)
        summary = COMMANDS[args.command](args)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return 1
    except SOLVER_ERRORS as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return 2
    print(summary)
    return 0


if __name__ == "__main__":
    sys.exit(main())
