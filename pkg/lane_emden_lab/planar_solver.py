"""
Five-point finite-difference Newton solver on origin-centered rectangles.
"""

import logging
import math
from typing import Optional

import numpy as np
from scipy import sparse
from scipy.sparse.linalg import LinearOperator, gmres

from .config import LinearSolver, PlanarSolveConfig
from .core import normal_derivative
from .errors import GridMismatchError
from .models import ExponentPair, PlanarGrid, SolutionPair
from .newton import LaneEmdenSystem, LinearSolve, damped_newton, direct_solve, moment_matched_amplitudes
from .radial_solver import finish_solve

logger = logging.getLogger(__name__)

__all__ = ["solve_planar", "normal_derivative", "product_cosine", "eigenfunction_guess", "jacobi_gmres"]

GMRES_RESTART = 100
GMRES_MAXITER = 50


def product_cosine(grid: PlanarGrid) -> np.ndarray:
    """cos(πx/a)·cos(πy/b) on the centered rectangle, exactly zero on the boundary ring."""
    shape = np.outer(np.cos(math.pi * grid.x / grid.domain.a), np.cos(math.pi * grid.y / grid.domain.b))
    return grid.embed(grid.interior(np.clip(shape, 0.0, None)))


def eigenfunction_guess(e: ExponentPair, grid: PlanarGrid) -> np.ndarray:
    """Moment-matched multiples of the first grid eigenvector, stacked (u, v)."""
    shape = product_cosine(grid)
    shape /= np.max(shape)
    lam = math.pi**2 * (1.0 / grid.domain.a**2 + 1.0 / grid.domain.b**2)
    alpha, beta = moment_matched_amplitudes(e, lam, shape, grid)
    inner = grid.interior(shape)
    return np.concatenate([alpha * inner, beta * inner])


def jacobi_gmres(rtol: float) -> LinearSolve:
    """GMRES with a diagonal (Jacobi) preconditioner; falls back to a direct solve if it stalls."""

    def solve(J: sparse.spmatrix, rhs: np.ndarray) -> np.ndarray:
        J = J.tocsr()
        inv_diag = 1.0 / J.diagonal()
        precond = LinearOperator(J.shape, matvec=lambda x: inv_diag * x)
        x, info = gmres(J, rhs, rtol=rtol, atol=0.0, restart=GMRES_RESTART, maxiter=GMRES_MAXITER, M=precond)
        if info != 0:
            logger.warning("GMRES did not reach rtol=%.1e (info=%d); using a direct solve", rtol, info)
            return direct_solve(J, rhs)
        return np.asarray(x)

    return solve


def _warm_values(start: SolutionPair, grid: PlanarGrid) -> np.ndarray:
    if start.grid != grid:
        raise GridMismatchError("planar warm starts must come from the same grid")
    return np.concatenate([start.u.interior_values(), start.v.interior_values()])


def solve_planar(e: ExponentPair, grid: PlanarGrid, cfg: Optional[PlanarSolveConfig] = None) -> SolutionPair:
    """Damped Newton on the five-point system, started from the scaled product eigenfunction."""
    cfg = cfg or PlanarSolveConfig()
    if not isinstance(grid, PlanarGrid):
        raise GridMismatchError("solve_planar works on a PlanarGrid")
    system = LaneEmdenSystem(e, grid)
    x0 = eigenfunction_guess(e, grid) if cfg.warm_start is None else _warm_values(cfg.warm_start, grid)
    linear = direct_solve if cfg.linear_solver is LinearSolver.DIRECT else jacobi_gmres(cfg.linear_tol)
    result = damped_newton(system, x0, cfg, linear_solve=linear)
    logger.debug("solve_planar %s on %dx%d: %s", e, grid.nx, grid.ny, result.status.value)
    return finish_solve(e, system, result)

