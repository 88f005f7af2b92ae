"""
Numerical kernels shared by the solvers and the diagnostics: exponent classification, guarded powers,
quadrature, the discrete Laplacian and boundary traces.
"""

import math
from dataclasses import dataclass, field
from typing import Dict, Optional, Tuple, Union

import numpy as np
from scipy import sparse

from .errors import DomainError
from .models import Criticality, ExponentPair, Field, Grid, PlanarGrid, RadialGrid

# Bases at or below this are treated as exact zeros by stable_pow.
POW_FLOOR = 1e-300
# exp() arguments are capped here so that values and derivatives stay finite.
LOG_CAP = 690.0
CRITICAL_TOL = 1e-12

ArrayLike = Union[float, np.ndarray]


def classify(e: ExponentPair, n: int = 2) -> Criticality:
    """Place (p, q) relative to the critical hyperbola 1/(p+1) + 1/(q+1) = (n-2)/n."""
    if int(n) != n or n < 2:
        raise ValueError(f"dimension must be an integer >= 2, got {n}")
    lhs = 1.0 / (e.p + 1.0) + 1.0 / (e.q + 1.0)
    rhs = (n - 2.0) / n
    if abs(lhs - rhs) <= CRITICAL_TOL:
        return Criticality.CRITICAL
    return Criticality.SUBCRITICAL if lhs > rhs else Criticality.SUPERCRITICAL


def stable_pow(base: ArrayLike, exponent: float) -> Tuple[ArrayLike, ArrayLike]:
    """
    Evaluate base**exponent and its derivative without overflow or subnormal noise.

    Bases <= POW_FLOOR map to (0, 0). Works elementwise on arrays; scalars come back as floats.
    """
    if exponent < 1:
        raise ValueError(f"stable_pow expects exponent >= 1, got {exponent}")
    b = np.asarray(base, dtype=float)
    if np.any(np.isnan(b)) or np.any(b < 0):
        raise DomainError("stable_pow is undefined for negative bases")

    live = b > POW_FLOOR
    log_b = np.log(np.where(live, b, 1.0))
    value = np.where(live, np.exp(np.minimum(exponent * log_b, LOG_CAP)), 0.0)
    derivative = np.where(live, exponent * np.exp(np.minimum((exponent - 1.0) * log_b, LOG_CAP)), 0.0)

    if b.ndim == 0:
        return float(value), float(derivative)
    return value, derivative


def power(base: ArrayLike, exponent: float) -> ArrayLike:
    """base**exponent through stable_pow, value only."""
    return stable_pow(base, exponent)[0]


# ---------------------------------------------------------------------------
# Quadrature
# ---------------------------------------------------------------------------


def quadrature_weights(grid: Grid) -> np.ndarray:
    """Trapezoid weights over the whole domain, boundary nodes included."""
    if isinstance(grid, RadialGrid):
        w = 2.0 * math.pi * grid.h * grid.nodes.copy()
        w[-1] *= 0.5
        return w
    cx = np.ones(grid.nx + 2)
    cy = np.ones(grid.ny + 2)
    cx[[0, -1]] = 0.5
    cy[[0, -1]] = 0.5
    return grid.hx * grid.hy * np.outer(cx, cy)


def integrate(values: Union[Field, np.ndarray], grid: Optional[Grid] = None) -> float:
    """Integral of nodal values over the domain."""
    if isinstance(values, Field):
        grid = values.grid
        values = values.values
    if grid is None:
        raise ValueError("a grid is required to integrate raw arrays")
    return float(np.sum(quadrature_weights(grid) * values))


def gradient(f: Field) -> Tuple[np.ndarray, ...]:
    """Centered differences inside, second-order one-sided differences at the edges."""
    grid = f.grid
    if isinstance(grid, RadialGrid):
        g = np.gradient(f.values, grid.h, edge_order=2)
        g[0] = 0.0
        return (g,)
    gx, gy = np.gradient(f.values, grid.hx, grid.hy, edge_order=2)
    return gx, gy


# ---------------------------------------------------------------------------
# Discrete -Δ
# ---------------------------------------------------------------------------


def neg_laplacian(values: np.ndarray, grid: Grid) -> np.ndarray:
    """-Δ_h at the unknown nodes, using whatever boundary values ``values`` carries."""
    w = np.asarray(values, dtype=float)
    if isinstance(grid, RadialGrid):
        h = grid.h
        r = grid.nodes
        out = np.empty(grid.n)
        # Δw(0) = 2 w''(0) for smooth radial w
        out[0] = -4.0 * (w[1] - w[0]) / h**2
        out[1:] = -(
            (w[2:] - 2.0 * w[1:-1] + w[:-2]) / h**2 + (w[2:] - w[:-2]) / (2.0 * r[1:-1] * h)
        )
        return out
    hx2, hy2 = grid.hx**2, grid.hy**2
    c = w[1:-1, 1:-1]
    lap = (2.0 * c - w[2:, 1:-1] - w[:-2, 1:-1]) / hx2 + (2.0 * c - w[1:-1, 2:] - w[1:-1, :-2]) / hy2
    return lap.ravel()


def laplacian_operator(grid: Grid) -> sparse.csc_matrix:
    """Sparse -Δ_h acting on the unknowns (homogeneous boundary data)."""
    if isinstance(grid, RadialGrid):
        n, h = grid.n, grid.h
        r = grid.nodes[:n]
        main = np.full(n, 2.0 / h**2)
        main[0] = 4.0 / h**2
        upper = np.empty(n - 1)
        lower = np.empty(n - 1)
        upper[0] = -4.0 / h**2
        upper[1:] = -(1.0 / h**2 + 1.0 / (2.0 * r[1 : n - 1] * h))
        lower[:] = -(1.0 / h**2 - 1.0 / (2.0 * r[1:n] * h))
        return sparse.diags([lower, main, upper], [-1, 0, 1], format="csc")

    def second_difference(m: int, step: float) -> sparse.spmatrix:
        return sparse.diags([-np.ones(m - 1), 2.0 * np.ones(m), -np.ones(m - 1)], [-1, 0, 1]) / step**2

    ix = sparse.identity(grid.nx)
    iy = sparse.identity(grid.ny)
    op = sparse.kron(second_difference(grid.nx, grid.hx), iy) + sparse.kron(ix, second_difference(grid.ny, grid.hy))
    return op.tocsc()


def operator_inf_norm(grid: Grid) -> float:
    """Row-sum bound of -Δ_h, used for the roundoff floor of residuals."""
    if isinstance(grid, RadialGrid):
        return 8.0 / grid.h**2
    return 4.0 / grid.hx**2 + 4.0 / grid.hy**2


# ---------------------------------------------------------------------------
# Boundary traces
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class BoundaryTrace:
    """Outward normal derivative samples with their arclength weights and x·ν."""

    values: np.ndarray
    ds: np.ndarray
    x_dot_nu: np.ndarray
    sides: Dict[str, slice] = field(default_factory=dict)

    def integrate(self, g: Optional[np.ndarray] = None) -> float:
        """∫∂Ω g ds with the arclength weights; g defaults to the normal derivative itself."""
        integrand = self.values if g is None else g
        return float(np.sum(self.ds * integrand))

    def side(self, name: str) -> np.ndarray:
        """Samples of one side ('rim' on the disk; 'left', 'right', 'bottom', 'top' on rectangles)."""
        return self.values[self.sides[name]]

    def midpoints(self) -> np.ndarray:
        """One sample per side taken at its midpoint, averaging the two central nodes on even sides."""
        out = []
        for sl in self.sides.values():
            side = self.values[sl]
            out.append(0.5 * (side[(side.size - 1) // 2] + side[side.size // 2]))
        return np.array(out)


def _one_sided(boundary: np.ndarray, first: np.ndarray, second: np.ndarray, step: float) -> np.ndarray:
    return (3.0 * boundary - 4.0 * first + second) / (2.0 * step)


def normal_derivative(f: Field) -> BoundaryTrace:
    """
    Second-order one-sided outward normal derivative on the boundary.

    Rectangles are sampled at every boundary node of each side; at the four corners both sides
    carry the average of the two one-sided traces.
    """
    grid = f.grid
    w = f.values
    if isinstance(grid, RadialGrid):
        if grid.n < 2:
            raise ValueError("normal derivative needs two inward samples")
        value = _one_sided(w[-1], w[-2], w[-3], grid.h)
        return BoundaryTrace(
            values=np.array([value]),
            ds=np.array([2.0 * math.pi * grid.R]),
            x_dot_nu=np.array([grid.R]),
            sides={"rim": slice(0, 1)},
        )

    if not isinstance(grid, PlanarGrid) or min(grid.nx, grid.ny) < 2:
        raise ValueError("normal derivative needs two inward samples")
    hx, hy = grid.hx, grid.hy
    left = _one_sided(w[0, :], w[1, :], w[2, :], hx)
    right = _one_sided(w[-1, :], w[-2, :], w[-3, :], hx)
    bottom = _one_sided(w[:, 0], w[:, 1], w[:, 2], hy)
    top = _one_sided(w[:, -1], w[:, -2], w[:, -3], hy)

    corners = {
        "left_bottom": 0.5 * (left[0] + bottom[0]),
        "left_top": 0.5 * (left[-1] + top[0]),
        "right_bottom": 0.5 * (right[0] + bottom[-1]),
        "right_top": 0.5 * (right[-1] + top[-1]),
    }
    left[0], left[-1] = corners["left_bottom"], corners["left_top"]
    right[0], right[-1] = corners["right_bottom"], corners["right_top"]
    bottom[0], bottom[-1] = corners["left_bottom"], corners["right_bottom"]
    top[0], top[-1] = corners["left_top"], corners["right_top"]

    def edge_weights(m: int, step: float) -> np.ndarray:
        ds = np.full(m + 2, step)
        ds[[0, -1]] = 0.5 * step
        return ds

    dsy = edge_weights(grid.ny, hy)
    dsx = edge_weights(grid.nx, hx)
    half_a, half_b = 0.5 * grid.domain.a, 0.5 * grid.domain.b

    values = np.concatenate([left, right, bottom, top])
    ds = np.concatenate([dsy, dsy, dsx, dsx])
    # x·ν is constant on each side of a centered rectangle
    x_dot_nu = np.concatenate(
        [np.full(dsy.size, half_a), np.full(dsy.size, half_a), np.full(dsx.size, half_b), np.full(dsx.size, half_b)]
    )
    ly, lx = dsy.size, dsx.size
    sides = {
        "left": slice(0, ly),
        "right": slice(ly, 2 * ly),
        "bottom": slice(2 * ly, 2 * ly + lx),
        "top": slice(2 * ly + lx, 2 * ly + 2 * lx),
    }
    return BoundaryTrace(values=values, ds=ds, x_dot_nu=x_dot_nu, sides=sides)
