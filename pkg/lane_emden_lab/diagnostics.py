"""
Identity and inequality checks on computed solutions.

Exact identities and exact inequalities get pass/fail flags; the abstract constants of the decay and
concentration estimates are reported as measured ratios only.
"""

import logging
import math
from dataclasses import asdict, dataclass, field
from typing import Any, Dict, Iterable, List, Optional, Sequence, Set, Tuple

import numpy as np
from scipy import stats
from scipy.integrate import cumulative_trapezoid

from .core import gradient, integrate, normal_derivative, power, quadrature_weights
from .errors import GridMismatchError, InsufficientDataError
from .models import Eigenpair, ExponentPair, RadialGrid, SolutionPair
from .spectral import grid_eigenpair

logger = logging.getLogger(__name__)

COMPARISON_TOL = 1e-8
JENSEN_TOL = 1e-10
HARNACK_FIT_NODES = 8
MIN_TREND_POINTS = 4
# trend slopes 2 and 1/2 with their fit allowances
MQ_SLOPE_CAP = 2.2
RATIO_SLOPE_FLOOR = 0.4

CHECK_NAMES: Tuple[str, ...] = (
    "energy",
    "flux",
    "pohozaev",
    "green-center",
    "eigen-moments",
    "jensen",
    "comparison",
    "brezis-merle",
    "mass-concentration",
    "lower-bound",
    "upper-envelope",
    "trend",
    "harnack",
    "pointwise-floor",
    "quadratic-decrease",
    "l2-harnack",
    "flux-harnack",
)
RADIAL_ONLY = frozenset(
    {
        "green-center",
        "lower-bound",
        "upper-envelope",
        "trend",
        "harnack",
        "pointwise-floor",
        "quadratic-decrease",
        "l2-harnack",
    }
)
NEEDS_EIGENPAIR = frozenset({"eigen-moments", "jensen", "lower-bound", "upper-envelope", "trend"})


def resolve_checks(checks: Optional[Iterable[str]]) -> Set[str]:
    """Expand None/'all' and reject unknown names."""
    if checks is None:
        return set(CHECK_NAMES)
    names = {c.strip() for c in checks if c.strip()}
    if "all" in names:
        return set(CHECK_NAMES)
    unknown = names - set(CHECK_NAMES)
    if unknown:
        raise ValueError(f"unknown checks {sorted(unknown)}; valid names: {', '.join(CHECK_NAMES)}")
    return names


def _require_radial(s: SolutionPair, op: str) -> RadialGrid:
    if not isinstance(s.grid, RadialGrid):
        raise ValueError(f"{op} needs a radial solution on the disk")
    return s.grid


# ---------------------------------------------------------------------------
# Integrals
# ---------------------------------------------------------------------------


def l1_norms(s: SolutionPair) -> Dict[str, float]:
    """∫u, ∫v, ∫u^q, ∫v^p, ∫u^{q+1} and ∫v^{p+1}."""
    grid, (p, q) = s.grid, (s.exponents.p, s.exponents.q)
    u, v = s.u.values, s.v.values
    return {
        "L1_u": integrate(u, grid),
        "L1_v": integrate(v, grid),
        "L1_uq": integrate(power(u, q), grid),
        "L1_vp": integrate(power(v, p), grid),
        "L1_uq1": integrate(power(u, q + 1.0), grid),
        "L1_vp1": integrate(power(v, p + 1.0), grid),
    }


def energy(s: SolutionPair) -> float:
    """∫∇u·∇v with centered-difference gradients."""
    gu = gradient(s.u)
    gv = gradient(s.v)
    density = sum(a * b for a, b in zip(gu, gv))
    return float(np.sum(quadrature_weights(s.grid) * density))


def energy_identity(s: SolutionPair) -> Tuple[float, float]:
    """(|E - ∫v^{p+1}|/E, |E - ∫u^{q+1}|/E) with E = ∫∇u·∇v."""
    E = energy(s)
    norms = l1_norms(s)
    return abs(E - norms["L1_vp1"]) / E, abs(E - norms["L1_uq1"]) / E


def pohozaev_residual(s: SolutionPair) -> float:
    """Relative gap in 2/(p+1)∫v^{p+1} + 2/(q+1)∫u^{q+1} = ∮(x·ν)u_ν v_ν."""
    p, q = s.exponents.p, s.exponents.q
    norms = l1_norms(s)
    lhs = 2.0 / (p + 1.0) * norms["L1_vp1"] + 2.0 / (q + 1.0) * norms["L1_uq1"]
    tu, tv = normal_derivative(s.u), normal_derivative(s.v)
    rhs = tu.integrate(tu.x_dot_nu * tu.values * tv.values)
    return abs(lhs - rhs) / lhs


def flux_identity(s: SolutionPair) -> Tuple[float, float]:
    """(|∮(-v_ν) - ∫u^q| rel, |∮(-u_ν) - ∫v^p| rel)."""
    norms = l1_norms(s)
    tu, tv = normal_derivative(s.u), normal_derivative(s.v)
    return (
        abs(-tv.integrate() - norms["L1_uq"]) / norms["L1_uq"],
        abs(-tu.integrate() - norms["L1_vp"]) / norms["L1_vp"],
    )


# ---------------------------------------------------------------------------
# Eigenfunction moments
# ---------------------------------------------------------------------------


@dataclass
class EigenMoments:
    residuals: Tuple[float, float]
    jensen_gaps: Tuple[float, float]
    uphi_l1: float
    uphi_bound: float
    relative_jensen_gaps: Tuple[float, float] = (0.0, 0.0)

    @property
    def jensen_ok(self) -> bool:
        return min(self.relative_jensen_gaps) >= -JENSEN_TOL

    @property
    def uphi_ok(self) -> bool:
        return self.uphi_l1 <= self.uphi_bound


def eigen_moments(s: SolutionPair, ep: Eigenpair) -> EigenMoments:
    """
    Test both equations against φ: λ∫uφ = ∫v^pφ and λ∫vφ = ∫u^qφ.

    Uses the grid eigenvalue so that only quadrature error remains. Jensen gaps
    ∫v^pφ - (∫vφ)^p and ∫u^qφ - (∫uφ)^q are returned raw and relative to ∫v^pφ, ∫u^qφ.
    """
    if ep.grid != s.grid:
        raise GridMismatchError("solution and eigenpair live on different grids")
    grid, phi = s.grid, ep.phi.values
    p, q = s.exponents.p, s.exponents.q
    lam = ep.discrete_lambda
    uphi = integrate(s.u.values * phi, grid)
    vphi = integrate(s.v.values * phi, grid)
    vp_phi = integrate(power(s.v.values, p) * phi, grid)
    uq_phi = integrate(power(s.u.values, q) * phi, grid)
    gaps = (vp_phi - power(vphi, p), uq_phi - power(uphi, q))
    kappa_bar = s.exponents.kappa / (s.exponents.kappa + 1.0)
    return EigenMoments(
        residuals=(abs(lam * uphi - vp_phi) / vp_phi, abs(lam * vphi - uq_phi) / uq_phi),
        jensen_gaps=(float(gaps[0]), float(gaps[1])),
        uphi_l1=integrate(np.abs(s.u.values * phi), grid),
        uphi_bound=max(1.0, lam ** (2.0 / kappa_bar)),
        relative_jensen_gaps=(float(gaps[0]) / max(vp_phi, 1.0), float(gaps[1]) / max(uq_phi, 1.0)),
    )


# ---------------------------------------------------------------------------
# Comparison and decay estimates
# ---------------------------------------------------------------------------


@dataclass
class ComparisonMargins:
    c0: float
    margin_u: float
    margin_v: float

    @property
    def passed(self) -> bool:
        return min(self.margin_u, self.margin_v) >= -COMPARISON_TOL


def comparison_bounds(s: SolutionPair) -> ComparisonMargins:
    """Margins c₀ - M/N^p and c₀ - N/M^q with c₀ = diam²/4."""
    c0 = s.domain.diameter**2 / 4.0
    p, q = s.exponents.p, s.exponents.q
    m_over = math.exp(math.log(s.M) - p * math.log(s.N))
    n_over = math.exp(math.log(s.N) - q * math.log(s.M))
    return ComparisonMargins(c0=c0, margin_u=c0 - m_over, margin_v=c0 - n_over)


@dataclass
class HarnackProfile:
    r: np.ndarray
    u_ratio: np.ndarray
    v_ratio: np.ndarray
    u_limit: float
    v_limit: float


def _limit_at_zero(r: np.ndarray, ratio: np.ndarray) -> float:
    k = min(HARNACK_FIT_NODES, r.size)
    coeffs = np.polyfit(r[:k] ** 2, ratio[:k], deg=min(2, k - 1))
    return float(coeffs[-1])


def harnack_decay(s: SolutionPair, r_max: Optional[float] = None) -> HarnackProfile:
    """Profiles (M - u)/(N^p r²) and (N - v)/(M^q r²) on (0, r_max]; both tend to 1/4 at the center."""
    grid = _require_radial(s, "harnack_decay")
    r_max = 0.5 * grid.R if r_max is None else r_max
    mask = (grid.nodes > 0) & (grid.nodes <= r_max + 1e-14)
    r = grid.nodes[mask]
    p, q = s.exponents.p, s.exponents.q
    u_ratio = (s.M - s.u.values[mask]) / (power(s.N, p) * r**2)
    v_ratio = (s.N - s.v.values[mask]) / (power(s.M, q) * r**2)
    return HarnackProfile(
        r=r,
        u_ratio=u_ratio,
        v_ratio=v_ratio,
        u_limit=_limit_at_zero(r, u_ratio),
        v_limit=_limit_at_zero(r, v_ratio),
    )


@dataclass
class PointwiseFloor:
    rho_star: float
    R1: float
    ratio: float
    clipped: bool


def concentration_radius(s: SolutionPair, exponents: Optional[ExponentPair] = None) -> float:
    """R₁ = (M/(q N^p))^{1/2}, with the solution's own exponents unless others are given."""
    e = exponents or s.exponents
    p, q = e.p, e.q
    return math.sqrt(math.exp(math.log(s.M) - math.log(q) - p * math.log(s.N)))


def pointwise_floor(s: SolutionPair) -> PointwiseFloor:
    """Largest ρ* with u^q ≥ e^{-1/3}M^q on B_ρ*, compared with R₁ (clipped to R/2)."""
    grid = _require_radial(s, "pointwise_floor")
    q = s.exponents.q
    threshold = s.M * math.exp(-1.0 / (3.0 * q))
    u = s.u.values
    below = np.nonzero(u < threshold)[0]
    k = int(below[0])
    if k == 0:
        rho_star = 0.0
    else:
        rho_star = grid.nodes[k - 1] + (u[k - 1] - threshold) / (u[k - 1] - u[k]) * grid.h
    R1 = concentration_radius(s)
    clipped = R1 >= 0.5 * grid.R
    if clipped:
        logger.warning("R1 = %.3g reaches half the radius; clipping", R1)
        R1 = 0.5 * grid.R
    return PointwiseFloor(rho_star=float(rho_star), R1=R1, ratio=float(rho_star) / R1, clipped=clipped)


def _log_kernel_integral(f: np.ndarray, grid: RadialGrid) -> float:
    """∫₀^R log(R/r)·f(r)·r dr; f frozen at r = 0 on the first cell, trapezoid beyond."""
    h, R = grid.h, grid.R
    first = f[0] * (0.5 * h * h * math.log(R / h) + 0.25 * h * h)
    r = grid.nodes[1:]
    g = np.log(R / r) * f[1:] * r
    w = np.full(r.size, h)
    w[[0, -1]] *= 0.5
    return first + float(np.sum(w * g))


def green_center_check(s: SolutionPair) -> Tuple[float, float]:
    """Relative gaps |u(0) - ∫log(R/r)v^p r dr| / u(0) and the mirror for v(0)."""
    grid = _require_radial(s, "green_center_check")
    p, q = s.exponents.p, s.exponents.q
    u0, v0 = s.u.values[0], s.v.values[0]
    gu = _log_kernel_integral(power(s.v.values, p), grid)
    gv = _log_kernel_integral(power(s.u.values, q), grid)
    return abs(u0 - gu) / u0, abs(v0 - gv) / v0


@dataclass
class MassConcentration:
    value: float
    superlevel_area: float
    L: float
    c_floor: float
    complement: float
    complement_bound: float

    @property
    def passed(self) -> bool:
        return self.value >= 0.5 * self.c_floor


def mass_concentration(s: SolutionPair, c_floor: Optional[float] = None) -> MassConcentration:
    """∫ u^q over {u ≥ 1 - L/q}, L = max(1, log(2|Ω|/c_floor)); c_floor defaults to ∫u^q."""
    grid, q = s.grid, s.exponents.q
    uq = power(s.u.values, q)
    c = integrate(uq, grid) if c_floor is None else c_floor
    area = s.domain.area
    L = max(1.0, math.log(2.0 * area / c))
    inside = s.u.values >= 1.0 - L / q
    return MassConcentration(
        value=integrate(np.where(inside, uq, 0.0), grid),
        superlevel_area=integrate(inside.astype(float), grid),
        L=L,
        c_floor=c,
        complement=integrate(np.where(inside, 0.0, uq), grid),
        complement_bound=math.exp(-L) * area,
    )


@dataclass
class BrezisMerle:
    value: float
    bound: float
    delta: float

    @property
    def passed(self) -> bool:
        return self.value <= self.bound


def brezis_merle_check(s: SolutionPair, delta: float = 2.0 * math.pi) -> BrezisMerle:
    """∫exp((4π - δ)v/‖u^q‖₁) against (4π²/δ)·diam²."""
    if not 0 < delta < 4.0 * math.pi:
        raise ValueError(f"delta must lie in (0, 4π), got {delta}")
    grid = s.grid
    norm = integrate(power(s.u.values, s.exponents.q), grid)
    exponent = np.minimum((4.0 * math.pi - delta) * s.v.values / norm, 700.0)
    value = integrate(np.exp(exponent), grid)
    bound = 4.0 * math.pi**2 / delta * s.domain.diameter**2
    return BrezisMerle(value=value, bound=bound, delta=delta)


# ---------------------------------------------------------------------------
# p = 1 asymptotics
# ---------------------------------------------------------------------------


@dataclass
class TrendFit:
    slope: float
    stderr: float
    intercept: float
    points: int


@dataclass
class AsymptoticFlags:
    lower_bound: bool
    lower_bound_margin: float
    upper_envelope: Optional[bool]
    # the grid eigenvalue the lower bound was tested against
    lambda_used: float = math.nan
    mq_trend: Optional[TrendFit] = None
    ratio_trend: Optional[TrendFit] = None

    @property
    def mq_trend_ok(self) -> Optional[bool]:
        """Slope of log M^q against log q at most 2 up to a fit allowance of 0.2."""
        if self.mq_trend is None:
            return None
        return self.mq_trend.slope <= MQ_SLOPE_CAP

    @property
    def ratio_trend_ok(self) -> Optional[bool]:
        """Slope of log(M^q/N²) against log q at least 1/2 up to a fit allowance of 0.1."""
        if self.ratio_trend is None:
            return None
        return self.ratio_trend.slope >= RATIO_SLOPE_FLOOR


def _fit(x: np.ndarray, y: np.ndarray) -> TrendFit:
    result = stats.linregress(x, y)
    return TrendFit(float(result.slope), float(result.stderr), float(result.intercept), int(x.size))


def trend_fits(points: Sequence[Tuple[float, float, float]], q_min: float = 64.0) -> Tuple[TrendFit, TrendFit]:
    """Slopes of log(M^q) and log(M^q/N²) against log q over rows with q ≥ q_min."""
    rows = sorted((q, M, N) for q, M, N in points if q >= q_min)
    if len(rows) < MIN_TREND_POINTS:
        raise InsufficientDataError(f"trend fits need {MIN_TREND_POINTS} points with q >= {q_min:g}, got {len(rows)}")
    q = np.array([r[0] for r in rows])
    M = np.array([r[1] for r in rows])
    N = np.array([r[2] for r in rows])
    log_mq = q * np.log(M)
    return _fit(np.log(q), log_mq), _fit(np.log(q), log_mq - 2.0 * np.log(N))


def asymptotic_inequalities(
    s: SolutionPair,
    ep: Eigenpair,
    sweep: Optional[Sequence[Tuple[float, float, float]]] = None,
    q_min: float = 64.0,
) -> AsymptoticFlags:
    """
    M^{q-1} ≥ λ² and, for q ≥ 64, M ≤ 1 + 4 log q / q; trend slopes when (q, M, N) sweep rows are given.
    """
    _require_radial(s, "asymptotic_inequalities")
    if s.exponents.p != 1.0:
        raise ValueError("asymptotic inequalities concern p = 1")
    q = s.exponents.q
    lam = ep.discrete_lambda
    margin = (q - 1.0) * math.log(s.M) - 2.0 * math.log(lam)
    envelope = s.M <= 1.0 + 4.0 * math.log(q) / q if q >= 64 else None
    flags = AsymptoticFlags(
        lower_bound=margin >= 0.0, lower_bound_margin=margin, upper_envelope=envelope, lambda_used=lam
    )
    if sweep is not None:
        flags.mq_trend, flags.ratio_trend = trend_fits(sweep, q_min=q_min)
    return flags


# ---------------------------------------------------------------------------
# Measured constants
# ---------------------------------------------------------------------------


@dataclass
class QuadraticDecrease:
    radius: float
    I: float
    constant: float


def _ball_integral(values: np.ndarray, grid: RadialGrid) -> np.ndarray:
    """Cumulative ∫_{B_r} values at every node radius."""
    r = grid.nodes
    return cumulative_trapezoid(2.0 * math.pi * r * values, r, initial=0.0)


def quadratic_decrease(s: SolutionPair, radius: Optional[float] = None) -> QuadraticDecrease:
    """
    I = ∫_{B_{2R}} u^q and the smallest C with M - u ≥ N^p r²/4 - C M^{q/2} √I r³ on 0 < r ≤ R.

    R defaults to min(R₁, R_disk/4).
    """
    grid = _require_radial(s, "quadratic_decrease")
    p, q = s.exponents.p, s.exponents.q
    if radius is None:
        radius = min(concentration_radius(s), 0.25 * grid.R)
    radius = min(max(radius, grid.h), 0.5 * grid.R)
    I_ball = float(np.interp(2.0 * radius, grid.nodes, _ball_integral(power(s.u.values, q), grid)))
    mask = (grid.nodes > 0) & (grid.nodes <= radius + 1e-14)
    r = grid.nodes[mask]
    deficit = power(s.N, p) * r**2 / 4.0 - (s.M - s.u.values[mask])
    scale = math.sqrt(power(s.M, q)) * math.sqrt(I_ball) * r**3
    constant = float(max(0.0, np.max(deficit / scale))) if r.size else 0.0
    return QuadraticDecrease(radius=radius, I=I_ball, constant=constant)


def l2_harnack(s: SolutionPair) -> float:
    """sup (M - u(r)) / (r·‖v‖_{L²(B_{2r})}) over nodes with 2r ≤ R."""
    grid = _require_radial(s, "l2_harnack")
    l2 = np.sqrt(_ball_integral(s.v.values**2, grid))
    i = np.arange(1, grid.n // 2 + 1)
    r = grid.nodes[i]
    return float(np.max((s.M - s.u.values[i]) / (r * l2[2 * i])))


def flux_harnack(s: SolutionPair) -> Tuple[float, float]:
    """
    (min(-u_ν)/‖u‖₁, min(-v_ν)/‖v‖₁) over the side midpoints.

    On rectangles the normal derivative vanishes at the corners, so the minimum is taken over the
    midpoint sample of each side; the disk has a single rim value.
    """
    norms = l1_norms(s)
    tu, tv = normal_derivative(s.u), normal_derivative(s.v)
    return float(np.min(-tu.midpoints())) / norms["L1_u"], float(np.min(-tv.midpoints())) / norms["L1_v"]


# ---------------------------------------------------------------------------
# Report
# ---------------------------------------------------------------------------


@dataclass
class CheckResult:
    name: str
    value: float
    threshold: float
    relation: str
    passed: Optional[bool]
    note: str = ""

    def line(self) -> str:
        """One aligned report line with the PASS/FAIL/INFO status."""
        status = "INFO" if self.passed is None else ("PASS" if self.passed else "FAIL")
        text = f"{self.name:<20} {self.value:>14.6e} {self.relation:>2} {self.threshold:<12.6g} {status}"
        return f"{text}  {self.note}" if self.note else text


@dataclass
class DiagnosticsReport:
    """Diagnostics of one solution; fields stay None for checks that were not requested or do not apply."""

    p: float
    q: float
    domain: Dict[str, Any]
    M: float
    N: float
    x_u: Tuple[float, ...]
    x_v: Tuple[float, ...]
    L1_u: float
    L1_v: float
    L1_uq: float
    L1_vp: float
    L1_uq1: float
    L1_vp1: float
    energy: float
    identity_tol: float = 1e-3
    lambda_: Optional[float] = None
    discrete_lambda: Optional[float] = None
    pohozaev_residual_rel: Optional[float] = None
    energy_identity_rel: Optional[Tuple[float, float]] = None
    flux_residual_rel: Optional[Tuple[float, float]] = None
    green_center_rel: Optional[Tuple[float, float]] = None
    eigen_moments: Optional[EigenMoments] = None
    comparison: Optional[ComparisonMargins] = None
    harnack: Optional[HarnackProfile] = None
    floor: Optional[PointwiseFloor] = None
    mass: Optional[MassConcentration] = None
    brezis_merle: Optional[BrezisMerle] = None
    asymptotics: Optional[AsymptoticFlags] = None
    quadratic: Optional[QuadraticDecrease] = None
    l2_harnack_constant: Optional[float] = None
    flux_harnack: Optional[Tuple[float, float]] = None
    requested: Set[str] = field(default_factory=set)

    @property
    def eigen_moment_rel(self) -> Optional[Tuple[float, float]]:
        return None if self.eigen_moments is None else self.eigen_moments.residuals

    @property
    def comparison_margins(self) -> Optional[Tuple[float, float]]:
        return None if self.comparison is None else (self.comparison.margin_u, self.comparison.margin_v)

    @property
    def harnack_ratio_profile(self) -> Optional[Tuple[np.ndarray, np.ndarray]]:
        return None if self.harnack is None else (self.harnack.r, self.harnack.u_ratio)

    @property
    def mass_concentration_value(self) -> Optional[float]:
        return None if self.mass is None else self.mass.value

    @property
    def brezis_merle_value(self) -> Optional[float]:
        return None if self.brezis_merle is None else self.brezis_merle.value

    @property
    def brezis_merle_bound(self) -> Optional[float]:
        return None if self.brezis_merle is None else self.brezis_merle.bound

    @property
    def lower_bound_check(self) -> Optional[bool]:
        return None if self.asymptotics is None else self.asymptotics.lower_bound

    def checks(self, names: Optional[Iterable[str]] = None) -> List[CheckResult]:
        """One line per computed check, optionally restricted to ``names``."""
        wanted = resolve_checks(names) if names is not None else set(CHECK_NAMES)
        tol = self.identity_tol
        lines: List[CheckResult] = []

        def add(
            name: str, value: float, threshold: float, relation: str, passed: Optional[bool], note: str = ""
        ) -> None:
            if name.split(":")[0] in wanted:
                lines.append(CheckResult(name, float(value), threshold, relation, passed, note))

        if self.energy_identity_rel is not None:
            worst = max(self.energy_identity_rel)
            add("energy", worst, tol, "<=", worst <= tol)
        if self.flux_residual_rel is not None:
            worst = max(self.flux_residual_rel)
            add("flux", worst, tol, "<=", worst <= tol)
        if self.pohozaev_residual_rel is not None:
            disk = self.domain.get("shape") == "disk"
            passed = self.pohozaev_residual_rel <= tol if disk else None
            add("pohozaev", self.pohozaev_residual_rel, tol, "<=", passed, "" if disk else "rectangle: indicative")
        if self.green_center_rel is not None:
            worst = max(self.green_center_rel)
            add("green-center", worst, tol, "<=", worst <= tol)
        if self.eigen_moments is not None:
            em = self.eigen_moments
            add("eigen-moments", max(em.residuals), tol, "<=", max(em.residuals) <= tol)
            add("jensen", min(em.relative_jensen_gaps), -JENSEN_TOL, ">=", em.jensen_ok)
            add("jensen:uphi-bound", em.uphi_l1, em.uphi_bound, "<=", em.uphi_ok)
        if self.comparison is not None:
            worst = min(self.comparison.margin_u, self.comparison.margin_v)
            add("comparison", worst, -COMPARISON_TOL, ">=", self.comparison.passed)
        if self.brezis_merle is not None:
            bm = self.brezis_merle
            add("brezis-merle", bm.value, bm.bound, "<=", bm.passed, f"delta={bm.delta:.6g}")
        if self.mass is not None:
            add("mass-concentration", self.mass.value, 0.5 * self.mass.c_floor, ">=", self.mass.passed)
        if self.asymptotics is not None:
            a = self.asymptotics
            note = f"(q-1)log M - 2 log λ_h, λ_h={a.lambda_used:.10g} (grid eigenvalue)"
            add("lower-bound", a.lower_bound_margin, 0.0, ">=", a.lower_bound, note)
            if a.upper_envelope is not None:
                add("upper-envelope", self.M, 1.0 + 4.0 * math.log(self.q) / self.q, "<=", a.upper_envelope)
            if a.mq_trend is not None and a.ratio_trend is not None:
                add(
                    "trend:log-Mq",
                    a.mq_trend.slope,
                    MQ_SLOPE_CAP,
                    "<=",
                    a.mq_trend_ok,
                    f"stderr={a.mq_trend.stderr:.3g}",
                )
                add(
                    "trend:log-Mq/N2",
                    a.ratio_trend.slope,
                    RATIO_SLOPE_FLOOR,
                    ">=",
                    a.ratio_trend_ok,
                    f"stderr={a.ratio_trend.stderr:.3g}",
                )
        if self.harnack is not None:
            add("harnack", self.harnack.u_limit, 0.25, "~", None, f"v-limit={self.harnack.v_limit:.6g}")
        if self.floor is not None:
            note = "R1 clipped" if self.floor.clipped else ""
            add("pointwise-floor", self.floor.ratio, 0.0, ">", None, note)
        if self.quadratic is not None:
            add("quadratic-decrease", self.quadratic.constant, 0.0, ">=", None, f"I={self.quadratic.I:.6g}")
        if self.l2_harnack_constant is not None:
            add("l2-harnack", self.l2_harnack_constant, 0.0, ">=", None)
        if self.flux_harnack is not None:
            add("flux-harnack", min(self.flux_harnack), 0.0, ">", None)
        return lines

    def all_passed(self, names: Optional[Iterable[str]] = None) -> bool:
        """True when no computed check failed; informational lines do not count."""
        return all(c.passed is not False for c in self.checks(names))

    def to_dict(self) -> Dict[str, Any]:
        """JSON-ready dict with the derived fields and the check lines."""
        data = asdict(self)
        data["requested"] = sorted(self.requested)
        data["eigen_moment_rel"] = self.eigen_moment_rel
        data["comparison_margins"] = self.comparison_margins
        data["mass_concentration_value"] = self.mass_concentration_value
        data["brezis_merle_value"] = self.brezis_merle_value
        data["brezis_merle_bound"] = self.brezis_merle_bound
        data["lower_bound_check"] = self.lower_bound_check
        data["harnack_ratio_profile"] = (
            None if self.harnack is None else {"r": self.harnack.r.tolist(), "ratio": self.harnack.u_ratio.tolist()}
        )
        data["checks"] = [asdict(c) for c in self.checks()]
        return _plain(data)


def _plain(obj: Any) -> Any:
    """Recursively convert numpy containers and scalars for JSON."""
    if isinstance(obj, dict):
        return {k: _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, np.generic):
        return obj.item()
    return obj


def run_diagnostics(
    s: SolutionPair,
    ep: Optional[Eigenpair] = None,
    checks: Optional[Iterable[str]] = None,
    delta: float = 2.0 * math.pi,
    sweep: Optional[Sequence[Tuple[float, float, float]]] = None,
    c_floor: Optional[float] = None,
    identity_tol: float = 1e-3,
    trend_q_min: float = 64.0,
) -> DiagnosticsReport:
    """
    Run the requested checks on one solution.

    Radial-only checks are skipped on rectangles, the p = 1 asymptotics are skipped for p ≠ 1, and
    the trend fits run only when sweep rows (q, M, N) are supplied.
    """
    names = resolve_checks(checks)
    radial = s.is_radial
    p_is_one = s.exponents.p == 1.0
    norms = l1_norms(s)
    report = DiagnosticsReport(
        p=s.exponents.p,
        q=s.exponents.q,
        domain=s.domain.to_dict(),
        M=s.M,
        N=s.N,
        x_u=s.u.argmax(),
        x_v=s.v.argmax(),
        energy=energy(s),
        identity_tol=identity_tol,
        requested=names,
        **norms,
    )

    if names & NEEDS_EIGENPAIR:
        ep = ep or grid_eigenpair(s.grid)
        report.lambda_ = ep.lambda_
        report.discrete_lambda = ep.discrete_lambda
    if "energy" in names:
        report.energy_identity_rel = energy_identity(s)
    if "flux" in names:
        report.flux_residual_rel = flux_identity(s)
    if "pohozaev" in names:
        report.pohozaev_residual_rel = pohozaev_residual(s)
    if "comparison" in names:
        report.comparison = comparison_bounds(s)
    if names & {"eigen-moments", "jensen"} and ep is not None:
        report.eigen_moments = eigen_moments(s, ep)
    if "brezis-merle" in names:
        report.brezis_merle = brezis_merle_check(s, delta)
    if "mass-concentration" in names:
        report.mass = mass_concentration(s, c_floor)
    if "flux-harnack" in names:
        report.flux_harnack = flux_harnack(s)

    if radial:
        if "green-center" in names:
            report.green_center_rel = green_center_check(s)
        if "harnack" in names:
            report.harnack = harnack_decay(s)
        if "pointwise-floor" in names:
            report.floor = pointwise_floor(s)
        if "quadratic-decrease" in names:
            report.quadratic = quadratic_decrease(s)
        if "l2-harnack" in names:
            report.l2_harnack_constant = l2_harnack(s)
        if p_is_one and names & {"lower-bound", "upper-envelope", "trend"} and ep is not None:
            use_sweep = sweep if "trend" in names else None
            try:
                report.asymptotics = asymptotic_inequalities(s, ep, use_sweep, q_min=trend_q_min)
            except InsufficientDataError as e:
                logger.warning("Skipping trend fits: %s", e)
                report.asymptotics = asymptotic_inequalities(s, ep, None)
    skipped = names & RADIAL_ONLY if not radial else set()
    if skipped:
        logger.debug("Skipped radial-only checks on a rectangle: %s", sorted(skipped))
    return report
