"""Command-line front end.

Subcommands: point (single query), grid (CSV sweep), reconstruct (piecewise
profile of u(., t) with jump locations), table (error report against the
analytic reference), fv-compare (finite-volume cross-validation at cell
centers).  All output is plain CSV with '.' decimal points and 17
significant digits, so identical configurations produce identical bytes.

Exit codes: 0 success, 2 configuration error, 3 solver failure,
4 tolerance-gate failure in table mode.
"""

from __future__ import annotations

import argparse
import os
import sys
import time

import numpy as np

from . import finite_volume as fv
from . import piecewise as pw
from .control import minimum_value_point
from .entropy import EntropySolver, NoCandidatesError, reconstruct_profile
from .problems import ProblemSpec, analytic_error, catalog, get_problem, problem_from_json

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_SOLVER = 3
EXIT_GATE = 4

WORKERS_ENV_VAR = "ENTROPOINT_WORKERS"


class ConfigError(Exception):
    pass


def _fmt(v: float) -> str:
    return f"{float(v):.17g}"


def _resolve_problem(token: str) -> ProblemSpec:
    if token.endswith(".json") or os.path.sep in token:
        if not os.path.exists(token):
            raise ConfigError(f"problem file not found: {token}")
        return problem_from_json(token)
    try:
        return get_problem(token)
    except KeyError as exc:
        raise ConfigError(str(exc)) from exc


class _PointSolver:
    """Uniform (x, t) -> SolutionSample interface over both problem kinds."""

    def __init__(self, spec: ProblemSpec, rel_tol: float, root_tol: float, bvp_tol: float):
        self.spec = spec
        self.bvp_tol = bvp_tol
        if spec.kind == "space_independent":
            self._entropy = EntropySolver(spec.flux, spec.init,
                                          rel_tol=rel_tol, root_tol=root_tol)
        else:
            self._entropy = None

    def sample(self, x: float, t: float):
        if self._entropy is not None:
            return self._entropy.solve_point(x, t)
        return minimum_value_point(self.spec.control, self.spec.enumerator, x, t,
                                   bvp_tol=self.bvp_tol)

    def u(self, x: float, t: float) -> float:
        return self.sample(x, t).u


def _write(args, lines: list[str]) -> None:
    text = "\n".join(lines) + "\n"
    if args.output in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(args.output, "w", newline="") as fh:
            fh.write(text)


def _grid_rows(solver: _PointSolver, xs, ts, parallel: bool, workers: int | None):
    points = [(float(x), float(t)) for t in ts for x in xs]
    if parallel and len(points) > 1:
        from concurrent.futures import ThreadPoolExecutor

        if workers is None:
            workers = int(os.environ.get(WORKERS_ENV_VAR, os.cpu_count() or 1))
        with ThreadPoolExecutor(max_workers=max(1, workers)) as ex:
            return list(ex.map(lambda xt: solver.sample(*xt), points))
    return [solver.sample(x, t) for x, t in points]


def cmd_point(args) -> int:
    spec = _resolve_problem(args.problem)
    solver = _PointSolver(spec, args.rel_tol, args.root_tol, args.bvp_tol)
    s = solver.sample(args.x, args.t)
    _write(args, [",".join([_fmt(s.x), _fmt(s.t), _fmt(s.u), _fmt(s.J)])])
    return EXIT_OK


def cmd_grid(args) -> int:
    spec = _resolve_problem(args.problem)
    if args.nx < 1 or args.nt < 1:
        raise ConfigError("grid counts must be at least 1")
    solver = _PointSolver(spec, args.rel_tol, args.root_tol, args.bvp_tol)
    (xlo, xhi), (tlo, thi) = spec.domain_xt
    xs = np.linspace(args.x_range[0] if args.x_range else xlo,
                     args.x_range[1] if args.x_range else xhi, args.nx)
    ts = np.linspace(args.t_range[0] if args.t_range else tlo,
                     args.t_range[1] if args.t_range else thi, args.nt)
    samples = _grid_rows(solver, xs, ts, args.parallel, args.workers)
    header = "x,t,u,J"
    if spec.transform is not None:
        header += "," + spec.transform.column
    lines = [header]
    for s in samples:
        row = [_fmt(s.x), _fmt(s.t), _fmt(s.u), _fmt(s.J)]
        if spec.transform is not None:
            row.append(_fmt(spec.transform.apply(s.u)))
        lines.append(",".join(row))
    _write(args, lines)
    return EXIT_OK


def cmd_reconstruct(args) -> int:
    spec = _resolve_problem(args.problem)
    solver = _PointSolver(spec, args.rel_tol, args.root_tol, args.bvp_tol)
    (xlo, xhi), _ = spec.domain_xt
    lo = args.x_range[0] if args.x_range else xlo
    hi = args.x_range[1] if args.x_range else xhi
    t = args.t
    pf, jumps = reconstruct_profile(lambda x: solver.u(x, t), (lo, hi),
                                    rel_tol=args.profile_tol, n_scan=args.n_scan)
    xs = np.linspace(lo, hi, args.n_samples)
    us = pw.evaluate(pf, xs)
    lines = ["record,x,u"]
    for x, u in zip(xs, us):
        lines.append(f"sample,{_fmt(x)},{_fmt(u)}")
    for loc, ul, ur in jumps:
        lines.append(f"jump_left,{_fmt(loc)},{_fmt(ul)}")
        lines.append(f"jump_right,{_fmt(loc)},{_fmt(ur)}")
    _write(args, lines)
    return EXIT_OK


def cmd_table(args) -> int:
    spec = _resolve_problem(args.problem)
    if args.nx < 1 or args.nt < 1:
        raise ConfigError("grid counts must be at least 1")
    if spec.analytic is None:
        raise ConfigError(f"problem {spec.name} has no analytic reference for table mode")
    solver = _PointSolver(spec, args.rel_tol, args.root_tol, args.bvp_tol)
    (xlo, xhi), (tlo, thi) = spec.domain_xt
    xs = np.linspace(args.x_range[0] if args.x_range else xlo,
                     args.x_range[1] if args.x_range else xhi, args.nx)
    ts = np.linspace(args.t_range[0] if args.t_range else tlo,
                     args.t_range[1] if args.t_range else thi, args.nt)
    t0 = time.perf_counter()
    report = analytic_error(spec, solver.u, xs, ts,
                            shock_exclusion_radius=args.shock_exclusion)
    elapsed = time.perf_counter() - t0
    rate = report.n_points / elapsed if elapsed > 0 else float("inf")
    lines = [
        "problem,nx,nt,max_abs,l1,excluded_points,runtime_sec,points_per_sec",
        ",".join([spec.name, str(args.nx), str(args.nt), _fmt(report.max_abs),
                  _fmt(report.l1), str(report.excluded_points), _fmt(elapsed), _fmt(rate)]),
    ]
    _write(args, lines)
    if args.max_abs_gate is not None and report.max_abs > args.max_abs_gate:
        print(f"gate failed: max_abs {report.max_abs:.3e} > {args.max_abs_gate:.3e}",
              file=sys.stderr)
        return EXIT_GATE
    return EXIT_OK


def cmd_fv_compare(args) -> int:
    spec = _resolve_problem(args.problem)
    if spec.kind != "space_independent":
        raise ConfigError("fv-compare needs a space-independent flux")
    cfg = dict(spec.fv_config or {})
    lo = args.lo if args.lo is not None else cfg.get("lo", spec.domain_xt[0][0])
    hi = args.hi if args.hi is not None else cfg.get("hi", spec.domain_xt[0][1])
    ncells = args.ncells if args.ncells is not None else cfg.get("ncells", 500)
    t_end = args.t_end if args.t_end is not None else cfg.get("t_end", 1.0)
    solver = _PointSolver(spec, args.rel_tol, args.root_tol, args.bvp_tol)

    grid = fv.init_from(spec.init.g, lo, hi, ncells)
    grid = fv.run_until(grid, spec.flux, t_end)
    lines = ["x,u_fv,u_point"]
    for x, ufv in zip(grid.cell_centers, grid.cell_averages):
        lines.append(",".join([_fmt(x), _fmt(ufv), _fmt(solver.u(float(x), t_end))]))
    _write(args, lines)
    return EXIT_OK


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--problem", required=True,
                   help="catalog name or path to a problem JSON document")
    p.add_argument("--output", default="-", help="output path, '-' for stdout")
    p.add_argument("--rel-tol", type=float, default=pw.DEFAULT_REL_TOL)
    p.add_argument("--root-tol", type=float, default=pw.DEFAULT_ROOT_TOL)
    p.add_argument("--bvp-tol", type=float, default=1e-10)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="entropoint",
        description="Pointwise entropy solutions of scalar convex conservation laws",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("point", help="solve at one (x, t)")
    _add_common(p)
    p.add_argument("--x", type=float, required=True)
    p.add_argument("--t", type=float, required=True)
    p.set_defaults(fn=cmd_point)

    p = sub.add_parser("grid", help="CSV sweep over a space-time grid")
    _add_common(p)
    p.add_argument("--x-range", type=float, nargs=2, metavar=("LO", "HI"))
    p.add_argument("--t-range", type=float, nargs=2, metavar=("LO", "HI"))
    p.add_argument("--nx", type=int, default=50)
    p.add_argument("--nt", type=int, default=50)
    p.add_argument("--parallel", action="store_true")
    p.add_argument("--workers", type=int, default=None,
                   help=f"worker count (default: ${WORKERS_ENV_VAR} or CPU count)")
    p.set_defaults(fn=cmd_grid)

    p = sub.add_parser("reconstruct", help="piecewise profile of u(., t) with jumps")
    _add_common(p)
    p.add_argument("--t", type=float, required=True)
    p.add_argument("--x-range", type=float, nargs=2, metavar=("LO", "HI"))
    p.add_argument("--n-samples", type=int, default=400)
    p.add_argument("--n-scan", type=int, default=400)
    p.add_argument("--profile-tol", type=float, default=1e-6)
    p.set_defaults(fn=cmd_reconstruct)

    p = sub.add_parser("table", help="error table against the analytic reference")
    _add_common(p)
    p.add_argument("--x-range", type=float, nargs=2, metavar=("LO", "HI"))
    p.add_argument("--t-range", type=float, nargs=2, metavar=("LO", "HI"))
    p.add_argument("--nx", type=int, default=50)
    p.add_argument("--nt", type=int, default=50)
    p.add_argument("--shock-exclusion", type=float, default=1e-9)
    p.add_argument("--max-abs-gate", type=float, default=None,
                   help="exit 4 if max_abs exceeds this")
    p.set_defaults(fn=cmd_table)

    p = sub.add_parser("fv-compare", help="finite-volume cross-validation at cell centers")
    _add_common(p)
    p.add_argument("--ncells", type=int, default=None)
    p.add_argument("--t-end", type=float, default=None)
    p.add_argument("--lo", type=float, default=None)
    p.add_argument("--hi", type=float, default=None)
    p.set_defaults(fn=cmd_fv_compare)

    p = sub.add_parser("problems", help="list catalog problems")
    p.set_defaults(fn=_cmd_problems)
    return parser


def _cmd_problems(args) -> int:
    for spec in catalog():
        print(f"{spec.name}: {spec.kind}; {spec.notes}")
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code not in (0, None) else EXIT_OK
    try:
        return args.fn(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (NoCandidatesError, pw.ApproximationError) as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
