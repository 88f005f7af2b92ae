"""
First Dirichlet eigenpair of -Δ on the disk and on rectangles.
"""

import logging
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.optimize import brentq
from scipy.sparse.linalg import splu

from .core import integrate, laplacian_operator, quadrature_weights
from .errors import GridMismatchError, IterationStagnationError
from .models import DomainSpec, Eigenpair, Field, Grid, PlanarGrid, RadialGrid

logger = logging.getLogger(__name__)

MIN_RESOLUTION = 64
DRIFT_TOL = 1e-12
MAX_ITER = 1000


@dataclass
class DiscreteEigenpair:
    """Grid eigenvalue and unknown-node eigenvector (max-normalized)."""

    lambda_h: float
    vector: np.ndarray
    iterations: int
    stagnated: bool


def inverse_iteration(grid: Grid, tol: float = DRIFT_TOL, max_iter: int = MAX_ITER) -> DiscreteEigenpair:
    """Inverse power iteration on the discrete -Δ until the eigenvalue drift drops below ``tol``."""
    lu = splu(laplacian_operator(grid).tocsc())
    x = np.ones(grid.unknowns)
    lam = math.inf
    best_drift = math.inf
    since_improvement = 0
    for k in range(1, max_iter + 1):
        y = lu.solve(x)
        peak = float(np.max(np.abs(y)))
        lam_new = 1.0 / peak
        x = y / peak
        drift = abs(lam_new - lam) / lam_new
        lam = lam_new
        if drift < tol:
            return DiscreteEigenpair(lam, np.abs(x), k, False)
        if drift < best_drift:
            best_drift = drift
            since_improvement = 0
        else:
            since_improvement += 1
            if since_improvement >= 10:
                logger.warning("Inverse iteration stagnated at drift %.3e after %d steps", drift, k)
                return DiscreteEigenpair(lam, np.abs(x), k, True)
    logger.warning("Inverse iteration hit max_iter=%d with drift %.3e", max_iter, best_drift)
    return DiscreteEigenpair(lam, np.abs(x), max_iter, True)


def coarsened(grid: Grid) -> Grid:
    """The grid with (about) twice the spacing, for Richardson extrapolation."""
    if isinstance(grid, RadialGrid):
        return RadialGrid(grid.R, grid.n // 2)
    return PlanarGrid(grid.domain, (grid.nx + 1) // 2 - 1, (grid.ny + 1) // 2 - 1)


def spacing(grid: Grid) -> float:
    """Mesh width used for extrapolation: h on the disk, hx on rectangles."""
    return grid.h if isinstance(grid, RadialGrid) else grid.hx


def richardson(l_h: float, h: float, l_H: float, H: float, order: int = 2) -> float:
    """Eliminate the leading h^order error term from two approximations."""
    if h == H:
        raise ValueError("Richardson extrapolation needs two different spacings")
    wh, wH = H**order, h**order
    return (wh * l_h - wH * l_H) / (wh - wH)


def rayleigh_quotient(phi: Field) -> float:
    """∫φ·(-Δ_h φ) / ∫φ² with the grid's quadrature."""
    grid = phi.grid
    w = grid.interior(quadrature_weights(grid))
    f = phi.interior_values()
    Af = laplacian_operator(grid) @ f
    return float(np.sum(w * f * Af) / np.sum(w * f * f))


def first_dirichlet_eigenpair(domain: DomainSpec, grid: Grid, strict: bool = False) -> Eigenpair:
    """
    First eigenpair of -Δ with zero boundary data, φ > 0 and ∫φ = 1.

    ``lambda_`` is the Richardson-extrapolated value over ``grid`` and its coarsening;
    ``discrete_lambda`` is the eigenvalue of the grid operator itself. A stagnated iteration is
    returned flagged, or raised as IterationStagnationError when ``strict``.
    """
    if grid.domain != domain:
        raise GridMismatchError(f"grid is built on {grid.domain}, not {domain}")
    if grid.resolution < MIN_RESOLUTION:
        raise ValueError(f"eigenpair needs grid resolution >= {MIN_RESOLUTION}, got {grid.resolution}")
    return grid_eigenpair(grid, strict=strict)


def grid_eigenpair(grid: Grid, strict: bool = False) -> Eigenpair:
    """Eigenpair on any grid; λ is extrapolated only when the coarsened grid is still admissible."""
    fine = inverse_iteration(grid)
    lam = fine.lambda_h
    coarse_stagnated = False
    try:
        coarse_grid: Optional[Grid] = coarsened(grid)
    except ValueError:
        coarse_grid = None
    if coarse_grid is not None:
        coarse = inverse_iteration(coarse_grid)
        lam = richardson(fine.lambda_h, spacing(grid), coarse.lambda_h, spacing(coarse_grid))
        coarse_stagnated = coarse.stagnated

    values = grid.embed(fine.vector)
    values /= integrate(values, grid)
    stagnated = fine.stagnated or coarse_stagnated
    pair = Eigenpair(
        lambda_=lam,
        phi=Field(grid, values),
        discrete_lambda=fine.lambda_h,
        iterations=fine.iterations,
        stagnated=stagnated,
    )
    logger.debug("eigenpair on %s: discrete %.12g, extrapolated %.12g", grid, fine.lambda_h, lam)
    if stagnated and strict:
        raise IterationStagnationError("inverse iteration stagnated", best=pair)
    return pair


def _j0_series(x: float) -> float:
    """J₀(x) = Σ (-1)^k (x²/4)^k / (k!)²."""
    z = 0.25 * x * x
    term = 1.0
    total = 1.0
    k = 0
    while abs(term) > 1e-18 * max(1.0, abs(total)):
        k += 1
        term *= -z / (k * k)
        total += term
    return total


def bessel_j0_first_zero(tol: float = 1e-12) -> float:
    """First positive zero of J₀ from its power series, bracketed in [2, 3]."""
    return float(brentq(_j0_series, 2.0, 3.0, xtol=tol))


def exact_first_eigenvalue(domain: DomainSpec) -> float:
    """Closed form λ₁: (j₀/R)² on the disk, π²(1/a² + 1/b²) on the rectangle."""
    if domain.is_disk:
        return (bessel_j0_first_zero() / domain.radius) ** 2
    return math.pi**2 * (1.0 / domain.a**2 + 1.0 / domain.b**2)
