"""
Exponent sweeps: solve a family of (p, q) pairs, summarize each row, fit and export the table.

Warm-start sweeps walk the q-list in order and continue each row from the previous converged one;
cold sweeps solve every row independently and may run in worker processes. Row failures are
recorded in the table and never abort the sweep.
"""

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Any, Dict, FrozenSet, Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd
from scipy import stats

from .config import ContinuationConfig, PlanarSolveConfig, RadialSolveConfig
from .diagnostics import NEEDS_EIGENPAIR, concentration_radius, resolve_checks, run_diagnostics
from .errors import ConfigError, ExportError, InsufficientDataError, LabError
from .models import DomainSpec, Eigenpair, ExponentPair, Grid, PlanarGrid, RadialGrid, SolutionPair
from .radial_solver import continue_in_exponents, solve_with_fallback
from .spectral import grid_eigenpair
from .storage import SCHEMA_VERSION, jsonable, provenance, read_json, write_json

logger = logging.getLogger(__name__)

CSV_COLUMNS = [
    "p",
    "q",
    "M",
    "N",
    "energy",
    "p_energy",
    "L1_u",
    "L1_v",
    "L1_uq",
    "L1_uq1",
    "pohozaev_rel",
    "energy_id_rel",
    "converged",
]
FLOAT_COLUMNS = CSV_COLUMNS[:-1] + [
    "L1_vp",
    "flux_rel",
    "residual_norm",
    "R1",
    "max_over_log_pq",
    "lower_bound_margin",
]
BOOL_COLUMNS = ["converged", "resolved"]
INT_COLUMNS = ["newton_iterations"]
# True / False / None: None when the check does not apply to the row
FLAG_COLUMNS = [
    "comparison_ok",
    "jensen_ok",
    "brezis_merle_ok",
    "mass_concentration_ok",
    "lower_bound",
    "upper_envelope",
]
COLUMNS = CSV_COLUMNS + [c for c in FLOAT_COLUMNS + BOOL_COLUMNS + INT_COLUMNS + FLAG_COLUMNS if c not in CSV_COLUMNS]
COLUMNS += ["status", "error"]

DEFAULT_SWEEP_CHECKS = frozenset(
    {"energy", "flux", "pohozaev", "comparison", "eigen-moments", "jensen", "brezis-merle", "mass-concentration"}
    | {"lower-bound", "upper-envelope"}
)
RESOLVED_NODES = 4.0
FLOOR_FRACTION = 0.5


class ExportFormat(str, Enum):
    CSV = "csv"
    JSON = "json"


class RowStatus(str, Enum):
    CONVERGED = "converged"
    # the solver failed where the concentration radius is below one grid spacing
    UNRESOLVED = "unresolved"
    FAILED = "failed"


def row_status(converged: bool, R1: Optional[float], spacing: float) -> RowStatus:
    """Status of a sweep row; a failed row whose (estimated) R₁ is below ``spacing`` is unresolved."""
    if converged:
        return RowStatus.CONVERGED
    if R1 is not None and math.isfinite(R1) and R1 < spacing:
        return RowStatus.UNRESOLVED
    return RowStatus.FAILED


def dyadic(kmin: int, kmax: int) -> List[float]:
    """[2^kmin, ..., 2^kmax] inclusive."""
    if kmin > kmax:
        raise ValueError(f"need kmin <= kmax, got {kmin}:{kmax}")
    return [2.0**k for k in range(kmin, kmax + 1)]


def _q_tuple(q_list: Iterable[float]) -> Tuple[float, ...]:
    qs = tuple(float(q) for q in q_list)
    if not qs:
        raise ConfigError("q-list is empty")
    if any(b <= a for a, b in zip(qs, qs[1:])):
        raise ConfigError(f"q-list must be strictly increasing, got {list(qs)}")
    return qs


@dataclass(frozen=True)
class FixedP:
    p: float
    q_list: Tuple[float, ...]
    name = "fixed-p"

    def __post_init__(self) -> None:
        object.__setattr__(self, "q_list", _q_tuple(self.q_list))
        self.pairs()

    def pairs(self) -> List[ExponentPair]:
        return [ExponentPair(self.p, q) for q in self.q_list]


@dataclass(frozen=True)
class Diagonal:
    q_list: Tuple[float, ...]
    name = "diagonal"

    def __post_init__(self) -> None:
        object.__setattr__(self, "q_list", _q_tuple(self.q_list))
        self.pairs()

    def pairs(self) -> List[ExponentPair]:
        return [ExponentPair(q, q) for q in self.q_list]


@dataclass(frozen=True)
class Ray:
    """p = K·q."""

    K: float
    q_list: Tuple[float, ...]
    name = "ray"

    def __post_init__(self) -> None:
        if not self.K > 0:
            raise ConfigError(f"K must be positive, got {self.K}")
        object.__setattr__(self, "q_list", _q_tuple(self.q_list))
        self.pairs()

    def pairs(self) -> List[ExponentPair]:
        return [ExponentPair(self.K * q, q) for q in self.q_list]


@dataclass(frozen=True)
class PowerRay:
    """p = max(1, q^alpha); exploratory, rows carry max(M, N)/log(pq) without pass/fail."""

    alpha: float
    q_list: Tuple[float, ...]
    name = "power-ray"

    def __post_init__(self) -> None:
        if not 0 < self.alpha < 1:
            raise ConfigError(f"alpha must lie in (0, 1), got {self.alpha}")
        object.__setattr__(self, "q_list", _q_tuple(self.q_list))
        self.pairs()

    def pairs(self) -> List[ExponentPair]:
        return [ExponentPair(max(1.0, q**self.alpha), q) for q in self.q_list]


SweepMode = Union[FixedP, Diagonal, Ray, PowerRay]


@dataclass(frozen=True)
class SweepPlan:
    mode: SweepMode
    domain: DomainSpec = field(default_factory=DomainSpec.disk)
    resolution: int = 1024
    solver: Optional[RadialSolveConfig] = None
    checks: FrozenSet[str] = DEFAULT_SWEEP_CHECKS
    warm_start: bool = True
    jobs: int = 1
    delta: float = 2.0 * math.pi
    continuation: ContinuationConfig = field(default_factory=ContinuationConfig)

    def __post_init__(self) -> None:
        if int(self.jobs) != self.jobs or self.jobs < 1:
            raise ConfigError(f"jobs must be a positive integer, got {self.jobs}")
        try:
            checks = resolve_checks(self.checks)
        except ValueError as e:
            raise ConfigError(str(e)) from e
        # trend fits need the whole table, not one row
        object.__setattr__(self, "checks", frozenset(checks - {"trend"}))
        self.grid()

    def grid(self) -> Grid:
        """Grid of the plan's domain at its resolution."""
        if self.domain.is_disk:
            return RadialGrid(self.domain.radius, self.resolution)
        return PlanarGrid(self.domain, self.resolution, self.resolution)

    def solver_config(self) -> RadialSolveConfig:
        """Explicit solver config, or the default for the domain type."""
        if self.solver is not None:
            return self.solver
        return RadialSolveConfig() if self.domain.is_disk else PlanarSolveConfig()

    def to_dict(self) -> Dict[str, Any]:
        """Plan settings for the provenance block."""
        mode = {k: v for k, v in self.mode.__dict__.items()}
        return {
            "mode": {"name": self.mode.name, **mode},
            "domain": self.domain.to_dict(),
            "resolution": self.resolution,
            "solver": self.solver_config().to_dict(),
            "checks": sorted(self.checks),
            "warm_start": self.warm_start,
            "jobs": self.jobs,
            "delta": self.delta,
        }


@dataclass
class SweepTable:
    """Sweep rows sorted by q, plus the provenance of the run that produced them."""

    frame: pd.DataFrame
    provenance: Dict[str, Any] = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.frame)

    def converged(self) -> pd.DataFrame:
        """Rows whose solve converged."""
        return self.frame[self.frame["converged"].astype(bool)]

    def points(self) -> List[Tuple[float, float, float]]:
        """(q, M, N) of the converged rows, for the trend fits."""
        ok = self.converged()
        return [(float(q), float(M), float(N)) for q, M, N in zip(ok["q"], ok["M"], ok["N"])]

    @property
    def convergence_rate(self) -> float:
        """Share of converged rows, NaN for an empty table."""
        return float(self.frame["converged"].mean()) if len(self.frame) else math.nan


def normalize_frame(frame: pd.DataFrame) -> pd.DataFrame:
    """Fix column order and dtypes so that a table and its JSON read-back compare equal."""
    frame = frame.reindex(columns=COLUMNS)
    for col in FLOAT_COLUMNS:
        frame[col] = frame[col].astype(float)
    for col in BOOL_COLUMNS:
        frame[col] = frame[col].astype("boolean").fillna(False).astype(bool)
    for col in INT_COLUMNS:
        frame[col] = frame[col].fillna(0).astype(int)
    for col in FLAG_COLUMNS:
        frame[col] = [None if v is None or (isinstance(v, float) and math.isnan(v)) else bool(v) for v in frame[col]]
        frame[col] = frame[col].astype(object)
    frame["error"] = frame["error"].fillna("").astype(str)
    frame["status"] = frame["status"].fillna(RowStatus.FAILED.value).astype(str)
    return frame.sort_values("q", kind="stable").reset_index(drop=True)


# ---------------------------------------------------------------------------
# Rows
# ---------------------------------------------------------------------------


def _spacing(grid: Grid) -> float:
    return grid.h if isinstance(grid, RadialGrid) else min(grid.hx, grid.hy)


def _row(s: SolutionPair, ep: Optional[Eigenpair], plan: SweepPlan) -> Dict[str, Any]:
    e = s.exponents
    report = run_diagnostics(s, ep, plan.checks, delta=plan.delta)
    R1 = concentration_radius(s)
    asym = report.asymptotics
    row: Dict[str, Any] = {
        "p": e.p,
        "q": e.q,
        "M": s.M,
        "N": s.N,
        "energy": report.energy,
        "p_energy": e.p * report.energy,
        "L1_u": report.L1_u,
        "L1_v": report.L1_v,
        "L1_uq": report.L1_uq,
        "L1_uq1": report.L1_uq1,
        "L1_vp": report.L1_vp,
        "pohozaev_rel": report.pohozaev_residual_rel,
        "energy_id_rel": None if report.energy_identity_rel is None else max(report.energy_identity_rel),
        "flux_rel": None if report.flux_residual_rel is None else max(report.flux_residual_rel),
        "converged": s.converged,
        "residual_norm": s.residual_norm,
        "newton_iterations": s.newton_iterations,
        "R1": R1,
        "resolved": R1 >= RESOLVED_NODES * _spacing(s.grid),
        "max_over_log_pq": max(s.M, s.N) / math.log(e.p * e.q),
        "comparison_ok": None if report.comparison is None else report.comparison.passed,
        "jensen_ok": None if report.eigen_moments is None else report.eigen_moments.jensen_ok,
        "brezis_merle_ok": None if report.brezis_merle is None else report.brezis_merle.passed,
        "mass_concentration_ok": None if report.mass is None else report.mass.passed,
        "lower_bound": None if asym is None else asym.lower_bound,
        "lower_bound_margin": None if asym is None else asym.lower_bound_margin,
        "upper_envelope": None if asym is None else asym.upper_envelope,
        "status": row_status(s.converged, R1, _spacing(s.grid)).value,
        "error": "",
    }
    if not row["resolved"]:
        logger.warning("(p, q) = (%g, %g): R1 = %.3g is below %g grid spacings", e.p, e.q, R1, RESOLVED_NODES)
    return row


def failed_row(e: ExponentPair, err: LabError, grid: Grid) -> Dict[str, Any]:
    """
    Table row for a pair the solver could not reach.

    When the error carries a best iterate, its maxima stand in for M and N and give an estimate of R₁
    at the target exponents; the row is marked unresolved when that estimate is below the grid spacing.
    """
    row: Dict[str, Any] = {"p": e.p, "q": e.q, "converged": False, "error": f"{type(err).__name__}: {err}"}
    best = getattr(err, "best", None)
    R1: Optional[float] = None
    if isinstance(best, SolutionPair):
        row.update(M=best.M, N=best.N, residual_norm=best.residual_norm, newton_iterations=best.newton_iterations)
        if best.M > 0 and best.N > 0:
            R1 = concentration_radius(best, e)
            row["R1"] = R1
    status = row_status(False, R1, _spacing(grid))
    row["status"] = status.value
    if status is RowStatus.UNRESOLVED:
        logger.warning(
            "sweep row (p, q) = (%g, %g) failed with R1 ~ %.3g below the grid spacing %.3g; a finer grid is needed",
            e.p,
            e.q,
            R1,
            _spacing(grid),
        )
    else:
        logger.warning("sweep row (p, q) = (%g, %g) failed: %s", e.p, e.q, err)
    return row


def _cold_row(args: Tuple[SweepPlan, ExponentPair, Optional[Eigenpair]]) -> Dict[str, Any]:
    plan, e, ep = args
    grid = plan.grid()
    try:
        return _row(solve_with_fallback(e, grid, plan.solver_config(), plan.continuation), ep, plan)
    except LabError as err:
        return failed_row(e, err, grid)


def _warm_rows(plan: SweepPlan, pairs: Sequence[ExponentPair], ep: Optional[Eigenpair]) -> List[Dict[str, Any]]:
    grid = plan.grid()
    cfg = plan.solver_config()
    previous: Optional[SolutionPair] = None
    rows = []
    for e in pairs:
        try:
            s = continue_in_exponents(e, grid, cfg, start=previous, continuation=plan.continuation)
            rows.append(_row(s, ep, plan))
            previous = s
        except LabError as err:
            rows.append(failed_row(e, err, grid))
    return rows


def run_sweep(plan: SweepPlan, flags: Optional[Dict[str, Any]] = None) -> SweepTable:
    """Solve every pair of the plan and collect one summary row per pair, sorted by q."""
    pairs = sorted(plan.mode.pairs(), key=lambda e: e.q)
    ep = grid_eigenpair(plan.grid()) if plan.checks & NEEDS_EIGENPAIR else None
    logger.info("sweep %s: %d rows on %s", plan.mode.name, len(pairs), plan.domain)

    if plan.warm_start:
        if plan.jobs > 1:
            logger.warning("warm-start sweeps run sequentially; ignoring jobs=%d", plan.jobs)
        rows = _warm_rows(plan, pairs, ep)
    elif plan.jobs > 1:
        with ProcessPoolExecutor(max_workers=plan.jobs) as pool:
            rows = list(pool.map(_cold_row, [(plan, e, ep) for e in pairs]))
    else:
        rows = [_cold_row((plan, e, ep)) for e in pairs]

    frame = normalize_frame(pd.DataFrame.from_records(rows, columns=COLUMNS))
    prov = provenance(flags)
    prov["plan"] = jsonable(plan.to_dict())
    table = SweepTable(frame, prov)
    logger.info("sweep %s: %d of %d rows converged", plan.mode.name, int(frame["converged"].sum()), len(frame))
    return table


# ---------------------------------------------------------------------------
# Analysis
# ---------------------------------------------------------------------------


@dataclass
class LogarithmicFit:
    """Least squares of N against log q, with the N/log q ratio and its log-derivative."""

    slope: float
    intercept: float
    correlation: float
    stderr: float
    ratio: pd.Series
    ratio_spread: float
    growth: pd.Series

    def as_tuple(self) -> Tuple[float, float, float]:
        return self.slope, self.intercept, self.correlation


def fit_logarithmic(table: SweepTable, q_min: float = 16.0, ratio_q_min: float = 64.0) -> LogarithmicFit:
    """
    Fit N = slope·log q + intercept over converged p = 1 rows with q ≥ q_min.

    ``ratio_spread`` is max/min of N/log q over rows with q ≥ ratio_q_min; ``growth`` estimates
    q·∂N/∂q between consecutive rows as ΔN/Δlog q.
    """
    if len(table.frame) and not (table.frame["p"] == 1.0).all():
        raise ValueError("fit_logarithmic needs a p = 1 sweep")
    ok = table.converged()
    ok = ok[ok["q"] >= q_min]
    if len(ok) < 4:
        raise InsufficientDataError(f"logarithmic fit needs 4 converged rows with q >= {q_min:g}, got {len(ok)}")
    log_q = np.log(ok["q"].to_numpy())
    N = ok["N"].to_numpy()
    result = stats.linregress(log_q, N)

    ratio = pd.Series(N / log_q, index=ok["q"].to_numpy(), name="N_over_log_q")
    tail = ratio[ratio.index >= ratio_q_min]
    spread = float(tail.max() / tail.min()) if len(tail) else math.nan
    growth = pd.Series(np.diff(N) / np.diff(log_q), index=ok["q"].to_numpy()[1:], name="q_dN_dq")
    return LogarithmicFit(
        slope=float(result.slope),
        intercept=float(result.intercept),
        correlation=float(result.rvalue),
        stderr=float(result.stderr),
        ratio=ratio,
        ratio_spread=spread,
        growth=growth,
    )


def l1_floor_summary(table: SweepTable) -> pd.DataFrame:
    """Per L¹ quantity: value on the smallest-q row, minimum over rows, and whether the floor holds."""
    ok = table.converged()
    if ok.empty:
        raise InsufficientDataError("no converged rows")
    quantities = ["L1_u", "L1_uq", "L1_v", "L1_uq1"]
    first = ok.iloc[0]
    summary = pd.DataFrame(
        {
            "first": [float(first[c]) for c in quantities],
            "min": [float(ok[c].min()) for c in quantities],
        },
        index=quantities,
    )
    summary["ratio"] = summary["min"] / summary["first"]
    summary["holds"] = summary["ratio"] >= FLOOR_FRACTION
    return summary


@dataclass
class EnergyContrast:
    p_energy_min: float
    p_energy_max: float
    spread: float
    uq1_growth: float


def energy_contrast(table: SweepTable, q_min: float = 16.0) -> EnergyContrast:
    """
    Relative spread (max − min)/min of p·energy over resolved converged rows with q ≥ q_min, and the
    growth factor of q·∫u^{q+1} from the first to the last converged row.
    """
    ok = table.converged()
    if len(ok) < 2:
        raise InsufficientDataError(f"energy contrast needs 2 converged rows, got {len(ok)}")
    window = ok[(ok["q"] >= q_min) & ok["resolved"]]
    if window.empty:
        lo = hi = spread = math.nan
    else:
        lo, hi = float(window["p_energy"].min()), float(window["p_energy"].max())
        spread = (hi - lo) / lo
    q_uq1 = ok["q"] * ok["L1_uq1"]
    return EnergyContrast(lo, hi, spread, float(q_uq1.iloc[-1] / q_uq1.iloc[0]))


# ---------------------------------------------------------------------------
# Export
# ---------------------------------------------------------------------------


def export(table: SweepTable, fmt: Union[ExportFormat, str], path: Union[str, Path]) -> Path:
    """CSV with the fixed column set, or JSON carrying every column and the provenance."""
    fmt = ExportFormat(fmt)
    target = Path(path)
    if fmt is ExportFormat.JSON:
        data = {
            "schema": SCHEMA_VERSION,
            "provenance": table.provenance,
            "columns": list(table.frame.columns),
            "rows": table.frame.to_dict(orient="records"),
        }
        return write_json(target, data)
    try:
        table.frame.reindex(columns=CSV_COLUMNS).to_csv(target, index=False, float_format="%.17g")
    except OSError as e:
        raise ExportError(target, e) from e
    logger.debug("wrote %s", target)
    return target


def import_table(path: Union[str, Path]) -> SweepTable:
    """Read a table written by export(..., "json")."""
    data = read_json(path)
    try:
        frame = pd.DataFrame.from_records(data["rows"], columns=data["columns"])
    except (KeyError, TypeError, ValueError) as e:
        raise ExportError(path, e) from e
    return SweepTable(normalize_frame(frame), data.get("provenance", {}))
