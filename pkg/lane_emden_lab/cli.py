"""
Command-line front end: ``solve``, ``sweep``, ``verify`` and ``eigen``.

Exit codes: 0 success, 1 usage or input error, 2 non-convergence or a failed exact check.
"""

import argparse
import logging
import sys
from dataclasses import replace
from pathlib import Path
from typing import Any, Dict, List, NoReturn, Optional, Sequence

from .config import LabConfig, RadialSolveConfig, load_config
from .diagnostics import DiagnosticsReport, resolve_checks, run_diagnostics
from .errors import ConfigError, ExportError, InsufficientDataError, LabError, SolverError
from .models import DomainSpec, ExponentPair, Grid, PlanarGrid, RadialGrid, SolutionPair
from .radial_solver import branch_agreement, solve_shooting, solve_with_fallback
from .spectral import exact_first_eigenvalue, first_dirichlet_eigenpair
from .storage import provenance, read_solution, write_report, write_solution
from .sweeps import (
    Diagonal,
    ExportFormat,
    FixedP,
    PowerRay,
    Ray,
    RowStatus,
    SweepMode,
    SweepPlan,
    SweepTable,
    dyadic,
    export,
    fit_logarithmic,
    import_table,
    run_sweep,
)

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_NUMERICAL = 2


class LabArgumentParser(argparse.ArgumentParser):
    """argparse exits with 2 on bad flags; usage errors here exit with 1."""

    def error(self, message: str) -> NoReturn:
        """Print usage and exit with the usage code."""
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


class UsageError(LabError):
    """Bad flag combination or input detected after parsing."""


def _add_domain_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--domain", choices=["disk", "rect"], default="disk")
    p.add_argument("--radius", type=float, default=1.0, help="disk radius")
    p.add_argument("--a", type=float, default=1.0, help="rectangle width")
    p.add_argument("--b", type=float, default=1.0, help="rectangle height")
    p.add_argument("--grid", type=int, default=None, help="nodes per direction (default from config)")


def _add_solver_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--tol", type=float, default=None, help="Newton tolerance (default from config)")
    p.add_argument("--linear-solver", choices=["direct", "iterative"], default=None, help="rectangles only")


def build_parser() -> argparse.ArgumentParser:
    """Parser for the four subcommands and the global flags."""
    parser = LabArgumentParser(prog="lane-emden-lab", description="Numerical laboratory for 2D Lane-Emden systems")
    parser.add_argument("--config", help="JSON configuration file")
    parser.add_argument("--verbose", "-v", action="store_true", help="debug logging")
    sub = parser.add_subparsers(dest="command", required=True)

    solve = sub.add_parser("solve", help="solve one exponent pair and write solution and report JSON")
    solve.add_argument("--p", type=float, required=True)
    solve.add_argument("--q", type=float, required=True)
    _add_domain_flags(solve)
    _add_solver_flags(solve)
    solve.add_argument("--out", default="solution", help="output path prefix")
    solve.add_argument("--checks", default=None, help="'all' or a comma list")
    solve.add_argument("--delta", type=float, default=None)
    solve.add_argument("--shooting", action="store_true", help="also run the shooting oracle (disk only)")

    sweep = sub.add_parser("sweep", help="solve a family of exponent pairs and export the table")
    sweep.add_argument("--mode", choices=["fixed-p", "diagonal", "ray", "power-ray"], required=True)
    sweep.add_argument("--p", type=float, default=1.0, help="fixed-p exponent")
    sweep.add_argument("--K", type=float, default=None, help="ray slope p/q")
    sweep.add_argument("--alpha", type=float, default=None, help="power-ray exponent, p = max(1, q^alpha)")
    qs = sweep.add_mutually_exclusive_group(required=True)
    qs.add_argument("--q-list", help="comma-separated q values")
    qs.add_argument("--q-dyadic", help="kmin:kmax, expands to 2^kmin ... 2^kmax")
    _add_domain_flags(sweep)
    _add_solver_flags(sweep)
    sweep.add_argument("--cold", action="store_true", help="solve rows independently (allows --jobs > 1)")
    sweep.add_argument("--jobs", type=int, default=None)
    sweep.add_argument("--checks", default=None)
    sweep.add_argument("--delta", type=float, default=None)
    sweep.add_argument("--out", default="sweep", help="output path prefix for .csv and .json")

    verify = sub.add_parser("verify", help="run the diagnostics battery and print one line per check")
    verify.add_argument("--in", dest="infile", help="solution JSON written by solve")
    verify.add_argument("--p", type=float, default=None)
    verify.add_argument("--q", type=float, default=None)
    _add_domain_flags(verify)
    _add_solver_flags(verify)
    verify.add_argument("--checks", default="all")
    verify.add_argument("--delta", type=float, default=None)
    verify.add_argument("--sweep-table", help="sweep JSON supplying (q, M, N) rows for the trend fits")
    verify.add_argument("--report", help="also write the report JSON here")

    eigen = sub.add_parser("eigen", help="first Dirichlet eigenvalue against the closed form")
    _add_domain_flags(eigen)
    return parser


# ---------------------------------------------------------------------------
# Helpers
# ---------------------------------------------------------------------------


def _flags(args: argparse.Namespace) -> Dict[str, Any]:
    return dict(vars(args))


def _domain(args: argparse.Namespace) -> DomainSpec:
    if args.domain == "disk":
        return DomainSpec.disk(args.radius)
    return DomainSpec.rectangle(args.a, args.b)


def _grid(args: argparse.Namespace, cfg: LabConfig) -> Grid:
    domain = _domain(args)
    if domain.is_disk:
        return RadialGrid(domain.radius, args.grid or cfg.grids.radial_n)
    n = args.grid or cfg.grids.planar_n
    return PlanarGrid(domain, n, n)


def _solver_config(args: argparse.Namespace, cfg: LabConfig, grid: Grid) -> RadialSolveConfig:
    if isinstance(grid, PlanarGrid):
        solver: RadialSolveConfig = cfg.planar_solver
        if args.linear_solver is not None:
            solver = replace(cfg.planar_solver, linear_solver=args.linear_solver)
    else:
        solver = cfg.radial_solver
    if args.tol is not None:
        solver = replace(solver, tol=args.tol)
    return solver


def _checks(raw: Optional[str], cfg: LabConfig) -> List[str]:
    names = (raw if raw is not None else cfg.diagnostics.checks).split(",")
    try:
        return sorted(resolve_checks(names))
    except ValueError as e:
        raise UsageError(str(e)) from e


def _q_values(args: argparse.Namespace) -> List[float]:
    try:
        if args.q_dyadic:
            kmin, kmax = (int(k) for k in args.q_dyadic.split(":"))
            return dyadic(kmin, kmax)
        return [float(q) for q in args.q_list.split(",") if q.strip()]
    except ValueError as e:
        raise UsageError(f"bad q values: {e}") from e


def _mode(args: argparse.Namespace) -> SweepMode:
    q_list = tuple(_q_values(args))
    if args.mode == "fixed-p":
        return FixedP(args.p, q_list)
    if args.mode == "diagonal":
        return Diagonal(q_list)
    if args.mode == "ray":
        if args.K is None:
            raise UsageError("--mode ray needs --K")
        return Ray(args.K, q_list)
    if args.alpha is None:
        raise UsageError("--mode power-ray needs --alpha")
    return PowerRay(args.alpha, q_list)


def _print_report(report: DiagnosticsReport, names: Sequence[str]) -> bool:
    print(f"(p, q) = ({report.p:g}, {report.q:g})  M = {report.M:.12g}  N = {report.N:.12g}")
    for check in report.checks(names):
        print("  " + check.line())
    return report.all_passed(names)


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------


def cmd_solve(args: argparse.Namespace, cfg: LabConfig) -> int:
    """Solve one pair, write the solution and its report, print the check lines."""
    e = ExponentPair(args.p, args.q)
    names = _checks(args.checks, cfg)
    grid = _grid(args, cfg)
    if args.shooting and not isinstance(grid, RadialGrid):
        raise UsageError("--shooting needs --domain disk")
    solver = _solver_config(args, cfg, grid)
    prov = provenance(_flags(args))
    out = Path(args.out)
    solution_path = out.with_name(out.name + ".solution.json")

    try:
        s = solve_with_fallback(e, grid, solver, cfg.continuation)
    except SolverError as err:
        print(f"❌ {err}", file=sys.stderr)
        if isinstance(err.best, SolutionPair):
            write_solution(err.best, solution_path, prov)
            print(f"💾 best iterate written to {solution_path}")
        return EXIT_NUMERICAL

    write_solution(s, solution_path, prov)
    delta = args.delta if args.delta is not None else cfg.diagnostics.delta
    report = run_diagnostics(s, checks=names, delta=delta, identity_tol=cfg.diagnostics.identity_tol)
    report_path = write_report(report, out.with_name(out.name + ".report.json"), prov)
    print(f"✅ converged in {s.newton_iterations} iterations, residual {s.residual_norm:.3e}")
    _print_report(report, names)

    if args.shooting and isinstance(grid, RadialGrid):
        try:
            oracle = solve_shooting(e, R=grid.R, grid=grid)
            gap_M, gap_N = branch_agreement(s, oracle)
            print(f"🎯 shooting oracle: M = {oracle.M:.12g}  N = {oracle.N:.12g}  gaps {gap_M:.2e}, {gap_N:.2e}")
        except SolverError as err:
            print(f"⚠️ shooting oracle failed: {err}")
    print(f"💾 {solution_path}, {report_path}")
    return EXIT_OK


def _print_sweep(table: SweepTable) -> None:
    print(f"{'q':>10} {'p':>10} {'M':>18} {'N':>18}  status")
    for row in table.frame.itertuples(index=False):
        print(f"{row.q:>10g} {row.p:>10g} {row.M:>18.12g} {row.N:>18.12g}  {row.status}")


def cmd_sweep(args: argparse.Namespace, cfg: LabConfig) -> int:
    """Run a sweep, export CSV and JSON, and fit N against log q for p = 1."""
    mode = _mode(args)
    domain = _domain(args)
    grid_n = args.grid or (cfg.grids.radial_n if domain.is_disk else cfg.grids.planar_n)
    sizing_grid = RadialGrid(domain.radius, grid_n) if domain.is_disk else PlanarGrid(domain, grid_n, grid_n)
    plan = SweepPlan(
        mode=mode,
        domain=domain,
        resolution=grid_n,
        solver=_solver_config(args, cfg, sizing_grid),
        checks=frozenset(_checks(args.checks, cfg)),
        warm_start=cfg.sweeps.warm_start and not args.cold,
        jobs=args.jobs or cfg.sweeps.jobs,
        delta=args.delta if args.delta is not None else cfg.diagnostics.delta,
        continuation=cfg.continuation,
    )
    table = run_sweep(plan, _flags(args))
    out = Path(args.out)
    csv_path = export(table, ExportFormat.CSV, out.with_name(out.name + ".csv"))
    json_path = export(table, ExportFormat.JSON, out.with_name(out.name + ".json"))
    _print_sweep(table)

    if isinstance(mode, FixedP) and mode.p == 1.0:
        try:
            fit = fit_logarithmic(table, q_min=cfg.sweeps.fit_q_min, ratio_q_min=cfg.sweeps.ratio_q_min)
            print(
                f"📈 N ≈ {fit.slope:.6g}·log q + {fit.intercept:.6g}  (r = {fit.correlation:.6f}, "
                f"N/log q max/min = {fit.ratio_spread:.4g})"
            )
        except InsufficientDataError as err:
            logger.info("no logarithmic fit: %s", err)
    print(f"💾 {csv_path}, {json_path}")
    failed = len(table) - len(table.converged())
    if failed:
        unresolved = int((table.frame["status"] == RowStatus.UNRESOLVED.value).sum())
        print(f"⚠️ {failed} of {len(table)} rows did not converge ({unresolved} below the grid spacing)")
        return EXIT_NUMERICAL
    return EXIT_OK


def cmd_verify(args: argparse.Namespace, cfg: LabConfig) -> int:
    """Diagnostics battery on a saved or freshly solved solution."""
    names = _checks(args.checks, cfg)
    if args.infile:
        s = read_solution(args.infile)
    elif args.p is not None and args.q is not None:
        grid = _grid(args, cfg)
        try:
            s = solve_with_fallback(
                ExponentPair(args.p, args.q), grid, _solver_config(args, cfg, grid), cfg.continuation
            )
        except SolverError as err:
            print(f"❌ {err}", file=sys.stderr)
            return EXIT_NUMERICAL
    else:
        raise UsageError("verify needs --in or both --p and --q")

    sweep = import_table(args.sweep_table).points() if args.sweep_table else None
    report = run_diagnostics(
        s,
        checks=names,
        delta=args.delta if args.delta is not None else cfg.diagnostics.delta,
        sweep=sweep,
        identity_tol=cfg.diagnostics.identity_tol,
        trend_q_min=cfg.sweeps.ratio_q_min,
    )
    if args.report:
        write_report(report, args.report, provenance(_flags(args)))
    passed = _print_report(report, names)
    print("✅ all exact checks pass" if passed else "❌ some exact checks failed")
    return EXIT_OK if passed else EXIT_NUMERICAL


def cmd_eigen(args: argparse.Namespace, cfg: LabConfig) -> int:
    """Print the grid and extrapolated eigenvalue next to the closed form."""
    grid = _grid(args, cfg)
    ep = first_dirichlet_eigenpair(grid.domain, grid)
    exact = exact_first_eigenvalue(grid.domain)
    print(f"λ discrete     = {ep.discrete_lambda:.12g}")
    print(f"λ extrapolated = {ep.lambda_:.12g}")
    print(f"λ exact        = {exact:.12g}")
    print(f"relative gap   = {abs(ep.lambda_ - exact) / exact:.3e}")
    if ep.stagnated:
        print("⚠️ inverse iteration stagnated")
    return EXIT_OK


_COMMANDS = {"solve": cmd_solve, "sweep": cmd_sweep, "verify": cmd_verify, "eigen": cmd_eigen}


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Entry point; returns the process exit code."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.WARNING,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )
    try:
        cfg = load_config(args.config)
        return _COMMANDS[args.command](args, cfg)
    except (UsageError, ConfigError, ExportError, ValueError) as e:
        print(f"❌ {e}", file=sys.stderr)
        return EXIT_USAGE
    except SolverError as e:
        print(f"❌ {e}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
