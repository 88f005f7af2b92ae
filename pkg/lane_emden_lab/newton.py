"""
Damped Newton iteration for the discrete system A·u = v^p, A·v = u^q, shared by the radial and
planar solvers.
"""

import logging
import math
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Optional, Tuple

import numpy as np
from scipy import sparse
from scipy.sparse.linalg import spsolve

from .config import RadialSolveConfig
from .core import integrate, laplacian_operator, operator_inf_norm, power, stable_pow
from .models import ExponentPair, Grid

logger = logging.getLogger(__name__)

# Roundoff floor multiplier: residuals of A·u cannot drop below a few ulps of |A|·|u|.
ROUNDOFF_FACTOR = 32.0

LinearSolve = Callable[[sparse.spmatrix, np.ndarray], np.ndarray]


class NewtonStatus(str, Enum):
    CONVERGED = "converged"
    MAX_ITER = "max_iter"
    STALLED = "stalled"
    POSITIVITY_LOST = "positivity_lost"


@dataclass
class NewtonResult:
    x: np.ndarray
    residual_norm: float
    iterations: int
    status: NewtonStatus
    tolerance: float

    @property
    def converged(self) -> bool:
        return self.status is NewtonStatus.CONVERGED


class LaneEmdenSystem:
    """
    Residual and Jacobian of the discrete system on the unknown nodes of a grid.

    The state vector stacks the unknowns of u and then of v.
    """

    def __init__(self, e: ExponentPair, grid: Grid) -> None:
        self.e = e
        self.grid = grid
        self.A = laplacian_operator(grid)
        self.m = grid.unknowns

    def split(self, x: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        """(u, v) unknowns of a stacked vector."""
        return x[: self.m], x[self.m :]

    def residual(self, x: np.ndarray) -> np.ndarray:
        """Stacked residual (-Δ_h u - v^p, -Δ_h v - u^q)."""
        u, v = self.split(x)
        return np.concatenate([self.A @ u - power(v, self.e.p), self.A @ v - power(u, self.e.q)])

    def jacobian(self, x: np.ndarray) -> sparse.csc_matrix:
        """Analytic block Jacobian of the residual."""
        u, v = self.split(x)
        _, dvp = stable_pow(v, self.e.p)
        _, duq = stable_pow(u, self.e.q)
        return sparse.bmat(
            [[self.A, -sparse.diags(dvp)], [-sparse.diags(duq), self.A]],
            format="csc",
        )

    def scale(self, x: np.ndarray) -> float:
        """max(|v^p|, |u^q|), the natural size of the right-hand sides."""
        u, v = self.split(x)
        s = max(float(np.max(power(v, self.e.p), initial=0.0)), float(np.max(power(u, self.e.q), initial=0.0)))
        return s if s > 0 else 1.0

    def residual_norm(self, x: np.ndarray, F: Optional[np.ndarray] = None) -> float:
        """max|F| relative to max(N^p, M^q)."""
        F = self.residual(x) if F is None else F
        return float(np.max(np.abs(F))) / self.scale(x)

    def tolerance(self, x: np.ndarray, tol: float) -> float:
        """The requested tolerance, raised to the roundoff floor of the discrete operator if needed."""
        floor = ROUNDOFF_FACTOR * np.finfo(float).eps * operator_inf_norm(self.grid) * float(np.max(np.abs(x)))
        return max(tol, floor / self.scale(x))


def direct_solve(J: sparse.spmatrix, rhs: np.ndarray) -> np.ndarray:
    """Sparse direct solve of a Newton system."""
    return np.asarray(spsolve(J.tocsc(), rhs))


def damped_newton(
    system: LaneEmdenSystem,
    x0: np.ndarray,
    cfg: RadialSolveConfig,
    linear_solve: LinearSolve = direct_solve,
) -> NewtonResult:
    """
    Newton with Armijo backtracking on the residual 2-norm.

    Trial points that leave the positive cone or are not finite are rejected like Armijo failures.
    If every rejection of a failed line search was a positivity rejection the result is flagged
    POSITIVITY_LOST; any other failed line search is STALLED.
    """
    x = np.array(x0, dtype=float)
    F = system.residual(x)
    norm = system.residual_norm(x, F)
    tol = system.tolerance(x, cfg.tol)

    for it in range(cfg.max_iter):
        tol = system.tolerance(x, cfg.tol)
        logger.debug("newton it=%d residual=%.3e tol=%.3e", it, norm, tol)
        if norm <= tol:
            return NewtonResult(x, norm, it, NewtonStatus.CONVERGED, tol)

        delta = linear_solve(system.jacobian(x), -F)
        if not np.all(np.isfinite(delta)):
            logger.warning("Newton direction is not finite at iteration %d", it)
            return NewtonResult(x, norm, it, NewtonStatus.STALLED, tol)

        f2 = float(np.linalg.norm(F))
        alpha = 1.0
        positivity_rejections = 0
        armijo_rejections = 0
        accepted = False
        while alpha >= cfg.min_step:
            trial = x + alpha * delta
            if not np.all(np.isfinite(trial)) or np.any(trial <= 0):
                positivity_rejections += 1
                alpha *= cfg.damping
                continue
            F_trial = system.residual(trial)
            if np.linalg.norm(F_trial) <= (1.0 - cfg.armijo * alpha) * f2:
                x, F = trial, F_trial
                accepted = True
                break
            armijo_rejections += 1
            alpha *= cfg.damping

        if not accepted:
            status = NewtonStatus.POSITIVITY_LOST if armijo_rejections == 0 else NewtonStatus.STALLED
            logger.warning("Line search failed at iteration %d (%s), residual %.3e", it, status.value, norm)
            return NewtonResult(x, norm, it, status, tol)
        if alpha < 1.0:
            logger.debug("damped step alpha=%.3e", alpha)
        norm = system.residual_norm(x, F)

    tol = system.tolerance(x, cfg.tol)
    status = NewtonStatus.CONVERGED if norm <= tol else NewtonStatus.MAX_ITER
    return NewtonResult(x, norm, cfg.max_iter, status, tol)


def moment_matched_amplitudes(e: ExponentPair, lam: float, shape: np.ndarray, grid: Grid) -> Tuple[float, float]:
    """
    Amplitudes (α, β) for u₀ = α·φ̂, v₀ = β·φ̂ with φ̂ the max-normalized first eigenfunction.

    Testing both equations against φ̂ gives λα·m₂ = β^p·m_{p+1} and λβ·m₂ = α^q·m_{q+1} with
    m_k = ∫φ̂^k; the pair is solved in logarithms.
    """
    log_moment = {k: math.log(integrate(power(shape, k), grid)) for k in {2.0, e.p + 1.0, e.q + 1.0}}
    log_lm2 = math.log(lam) + log_moment[2.0]
    kappa = e.kappa
    log_alpha = ((e.p + 1.0) * log_lm2 - log_moment[e.p + 1.0] - e.p * log_moment[e.q + 1.0]) / kappa
    log_beta = ((e.q + 1.0) * log_lm2 - log_moment[e.q + 1.0] - e.q * log_moment[e.p + 1.0]) / kappa
    return math.exp(log_alpha), math.exp(log_beta)
