"""
Radially symmetric solutions on the disk: damped Newton on the finite-difference system, continuation
in the exponents, and an independent shooting oracle.
"""

import logging
import math
from functools import lru_cache
from typing import Any, Callable, Optional, Tuple

import numpy as np
from scipy.integrate import solve_ivp
from scipy.optimize import brentq

from .config import ContinuationConfig, PlanarSolveConfig, RadialSolveConfig
from .core import neg_laplacian, power
from .errors import (
    GridMismatchError,
    NonConvergenceError,
    PositivityLossError,
    ShootingDivergenceError,
    SolverError,
)
from .models import ExponentPair, Field, Grid, PlanarGrid, RadialGrid, SolutionPair
from .newton import LaneEmdenSystem, NewtonResult, NewtonStatus, damped_newton, moment_matched_amplitudes
from .spectral import DiscreteEigenpair, inverse_iteration

logger = logging.getLogger(__name__)

SHOOTING_START = 1e-6
SHOOTING_MAX_RADIUS = 1e8
SHOOTING_MAX_ITER = 30

Solver = Callable[[ExponentPair, Grid, RadialSolveConfig], SolutionPair]


def radial_residual(u: Field, v: Field, e: ExponentPair) -> Tuple[Field, Field]:
    """
    Pointwise residuals -Δ_h u - v^p and -Δ_h v - u^q on the unknown nodes 0..n-1.

    Boundary values are taken from the fields as given; the rim entry of each residual is 0.
    """
    if u.grid != v.grid:
        raise GridMismatchError("u and v must share one grid")
    grid = u.grid
    if not isinstance(grid, RadialGrid):
        raise GridMismatchError("radial_residual needs fields on a RadialGrid")
    res_u = neg_laplacian(u.values, grid) - power(grid.interior(v.values), e.p)
    res_v = neg_laplacian(v.values, grid) - power(grid.interior(u.values), e.q)
    return Field(grid, grid.embed(res_u)), Field(grid, grid.embed(res_v))


@lru_cache(maxsize=32)
def _grid_eigenpair(grid: Grid) -> DiscreteEigenpair:
    return inverse_iteration(grid)


def eigenfunction_guess(e: ExponentPair, grid: RadialGrid) -> np.ndarray:
    """Stacked unknowns (α·φ̂, β·φ̂) built on the discrete first eigenvector."""
    eig = _grid_eigenpair(grid)
    vector = eig.vector / np.max(eig.vector)
    alpha, beta = moment_matched_amplitudes(e, eig.lambda_h, grid.embed(vector), grid)
    logger.debug("eigenfunction init for %s: alpha=%.6g beta=%.6g", e, alpha, beta)
    return np.concatenate([alpha * vector, beta * vector])


def _warm_values(start: SolutionPair, grid: RadialGrid) -> np.ndarray:
    if start.grid == grid:
        return np.concatenate([start.u.interior_values(), start.v.interior_values()])
    if not isinstance(start.grid, RadialGrid):
        raise GridMismatchError("a radial solve can only be warm-started from a radial solution")
    r_old = start.grid.nodes * (grid.R / start.grid.R)
    u = np.interp(grid.nodes, r_old, start.u.values)
    v = np.interp(grid.nodes, r_old, start.v.values)
    return np.concatenate([grid.interior(u), grid.interior(v)])


def _pair_from_result(e: ExponentPair, system: LaneEmdenSystem, result: NewtonResult) -> SolutionPair:
    u, v = system.split(result.x)
    grid = system.grid
    return SolutionPair(
        exponents=e,
        u=Field(grid, grid.embed(u)),
        v=Field(grid, grid.embed(v)),
        residual_norm=result.residual_norm,
        newton_iterations=result.iterations,
        converged=result.converged,
        tolerance=result.tolerance,
        method="newton",
    )


def finish_solve(e: ExponentPair, system: LaneEmdenSystem, result: NewtonResult) -> SolutionPair:
    """Wrap a Newton result; positivity loss raises, other failures come back with converged=False."""
    pair = _pair_from_result(e, system, result)
    if result.status is NewtonStatus.POSITIVITY_LOST:
        raise PositivityLossError(
            f"iterate for (p, q) = ({e.p:g}, {e.q:g}) lost positivity; warm-start from nearer exponents",
            best=pair,
        )
    if not result.converged:
        logger.warning(
            "Newton did not converge for (p, q) = (%g, %g): residual %.3e > %.3e (%s)",
            e.p,
            e.q,
            result.residual_norm,
            result.tolerance,
            result.status.value,
        )
    return pair


def solve_newton(e: ExponentPair, grid: RadialGrid, cfg: Optional[RadialSolveConfig] = None) -> SolutionPair:
    """Damped Newton on the radial finite-difference system, started from cfg's initialization."""
    cfg = cfg or RadialSolveConfig()
    if not isinstance(grid, RadialGrid):
        raise GridMismatchError("solve_newton works on a RadialGrid; use solve_planar for rectangles")
    system = LaneEmdenSystem(e, grid)
    x0 = eigenfunction_guess(e, grid) if cfg.warm_start is None else _warm_values(cfg.warm_start, grid)
    result = damped_newton(system, x0, cfg)
    logger.debug("solve_newton %s: %s after %d iterations", e, result.status.value, result.iterations)
    return finish_solve(e, system, result)


def solver_for(grid: Grid) -> Solver:
    """Newton solver matching the grid type."""
    if isinstance(grid, PlanarGrid):
        from .planar_solver import solve_planar

        def planar(e: ExponentPair, g: Grid, cfg: RadialSolveConfig) -> SolutionPair:
            if not isinstance(cfg, PlanarSolveConfig):
                cfg = PlanarSolveConfig(**cfg.to_dict(), warm_start=cfg.warm_start)
            return solve_planar(e, g, cfg)

        return planar
    return solve_newton  # type: ignore[return-value]


def _along_path(start: ExponentPair, target: ExponentPair, t: float) -> ExponentPair:
    if t >= 1.0 - 1e-12:
        return target
    return ExponentPair(start.p * (target.p / start.p) ** t, start.q * (target.q / start.q) ** t)


def base_pair(target: ExponentPair) -> ExponentPair:
    """Starting pair of a continuation: each exponent clamped at 2."""
    return ExponentPair(min(target.p, 2.0), min(target.q, 2.0))


def continue_in_exponents(
    target: ExponentPair,
    grid: Grid,
    cfg: Optional[RadialSolveConfig] = None,
    start: Optional[SolutionPair] = None,
    continuation: Optional[ContinuationConfig] = None,
) -> SolutionPair:
    """
    Follow the solution branch geometrically from ``start`` to ``target``.

    Without a start the base pair (min(p, 2), min(q, 2)) is solved from the eigenfunction guess.
    Each step multiplies the exponents by at most ``continuation.step``; a failed step is retried
    with half the step in log scale, and the path is abandoned below ``continuation.min_step``.
    """
    cfg = cfg or RadialSolveConfig()
    continuation = continuation or ContinuationConfig()
    solve = solver_for(grid)

    if start is None:
        base = base_pair(target)
        try:
            start = solve(base, grid, cfg.with_warm_start(None))
        except PositivityLossError as e:
            raise NonConvergenceError(f"base pair {base} lost positivity", best=e.best) from e
        if not start.converged:
            raise NonConvergenceError(f"base pair {base} did not converge", best=start)

    origin = start.exponents
    distance = max(abs(math.log2(target.p / origin.p)), abs(math.log2(target.q / origin.q)))
    if distance == 0.0:
        if start.grid == grid and start.converged:
            return start
        return solve(target, grid, cfg.with_warm_start(start))

    max_step = math.log2(continuation.step)
    min_step = math.log2(continuation.min_step)
    step = max_step
    t = 0.0
    current = start
    while t < 1.0:
        t_next = min(1.0, t + step / distance)
        e_next = _along_path(origin, target, t_next)
        try:
            candidate = solve(e_next, grid, cfg.with_warm_start(current))
            ok = candidate.converged
        except PositivityLossError:
            ok = False
        if ok:
            current = candidate
            t = t_next
            step = min(max_step, 2.0 * step)
            logger.debug("continuation reached (p, q) = (%g, %g)", e_next.p, e_next.q)
            continue
        step *= 0.5
        logger.warning("continuation step to (p, q) = (%g, %g) failed; step now 2^%g", e_next.p, e_next.q, step)
        if step < min_step:
            raise NonConvergenceError(
                f"continuation toward {target} stalled at (p, q) = ({current.exponents.p:g}, {current.exponents.q:g})",
                best=current,
            )
    return current


def solve_with_fallback(
    e: ExponentPair,
    grid: Grid,
    cfg: Optional[RadialSolveConfig] = None,
    continuation: Optional[ContinuationConfig] = None,
) -> SolutionPair:
    """Cold solve from the eigenfunction guess; continuation from the base pair when that fails."""
    cfg = (cfg or RadialSolveConfig()).with_warm_start(None)
    try:
        s = solver_for(grid)(e, grid, cfg)
        if s.converged:
            return s
        logger.warning("cold solve of %s did not converge; continuing from the base pair", e)
    except SolverError as err:
        logger.warning("cold solve of %s failed (%s); continuing from the base pair", e, err)
    return continue_in_exponents(e, grid, cfg, continuation=continuation)


# ---------------------------------------------------------------------------
# Shooting oracle
# ---------------------------------------------------------------------------


def taylor_start(M: float, N: float, e: ExponentPair, r0: float) -> Tuple[float, float, float, float]:
    """(u, u', v, v') at small r0 from u ≈ M - N^p r²/4, v ≈ N - M^q r²/4."""
    np_ = N**e.p
    mq = M**e.q
    return M - np_ * r0 * r0 / 4.0, -np_ * r0 / 2.0, N - mq * r0 * r0 / 4.0, -mq * r0 / 2.0


def _radial_rhs(e: ExponentPair) -> Callable[[float, np.ndarray], np.ndarray]:
    p, q = e.p, e.q

    def rhs(r: float, y: np.ndarray) -> np.ndarray:
        u, du, v, dv = y
        return np.array([du, -du / r - max(v, 0.0) ** p, dv, -dv / r - max(u, 0.0) ** q])

    return rhs


def _integrate(e: ExponentPair, M: float, N: float, r0: float, r1: float, rtol: float, **kwargs: Any) -> Any:
    """solve_ivp of the radial system from the Taylor start; failures become ShootingDivergenceError."""
    try:
        sol = solve_ivp(
            _radial_rhs(e),
            (r0, r1),
            taylor_start(M, N, e, r0),
            method="RK45",
            rtol=rtol,
            atol=rtol * 1e-3 * max(M, N, 1.0),
            **kwargs,
        )
    except (OverflowError, FloatingPointError, ValueError) as err:
        raise ShootingDivergenceError(f"integration from (M, N) = ({M:.6g}, {N:.6g}) diverged: {err}") from err
    if sol.status < 0 or not np.all(np.isfinite(sol.y)):
        raise ShootingDivergenceError(f"integration from (M, N) = ({M:.6g}, {N:.6g}) failed: {sol.message}")
    return sol


def _harmonic_zero(r: float, w: float, dw: float) -> float:
    """Zero of the radial harmonic continuation w + r·w'·log(s/r)."""
    if dw >= 0:
        raise ShootingDivergenceError("component is not decreasing where its partner vanishes")
    return r * math.exp(-w / (r * dw))


def _first_zeros(e: ExponentPair, t: float, rtol: float) -> Tuple[float, float]:
    """First zeros (r_u, r_v) of the solution with u(0) = 1, v(0) = t."""

    def u_zero(r: float, y: np.ndarray) -> float:
        return float(y[0])

    def v_zero(r: float, y: np.ndarray) -> float:
        return float(y[2])

    u_zero.terminal = True  # type: ignore[attr-defined]
    u_zero.direction = -1  # type: ignore[attr-defined]
    v_zero.terminal = True  # type: ignore[attr-defined]
    v_zero.direction = -1  # type: ignore[attr-defined]

    sol = _integrate(e, 1.0, t, SHOOTING_START, SHOOTING_MAX_RADIUS, rtol, events=(u_zero, v_zero))
    if sol.status != 1:
        raise ShootingDivergenceError(f"no zero crossing found for v(0)/u(0) = {t:.6g}")
    if sol.t_events[0].size:
        r_u = float(sol.t_events[0][0])
        _, _, v, dv = sol.y_events[0][0]
        return r_u, _harmonic_zero(r_u, v, dv)
    r_v = float(sol.t_events[1][0])
    u, du, _, _ = sol.y_events[1][0]
    return _harmonic_zero(r_v, u, du), r_v


def scaling_exponents(e: ExponentPair) -> Tuple[float, float]:
    """(a, b) of the invariance u ↦ μ^a u(μx), v ↦ μ^b v(μx)."""
    return 2.0 * (e.p + 1.0) / e.kappa, 2.0 * (e.q + 1.0) / e.kappa


def _reduced_guess(e: ExponentPair, R: float, rtol: float) -> Tuple[float, float]:
    """(M, N) on the disk of radius R from the normalized problem u(0) = 1 and the scaling law."""

    def mismatch(s: float) -> float:
        r_u, r_v = _first_zeros(e, math.exp(s), rtol)
        return math.log(r_u / r_v)

    s_prev, g_prev = 0.0, mismatch(0.0)
    s_star: Optional[float] = 0.0 if g_prev == 0.0 else None
    # r_u/r_v decreases as v(0) grows
    direction = 1.0 if g_prev > 0 else -1.0
    for k in range(1, 80):
        if s_star is not None:
            break
        s = k * direction
        g = mismatch(s)
        if g == 0.0:
            s_star = s
        elif (g > 0) != (g_prev > 0):
            lo, hi = min(s_prev, s), max(s_prev, s)
            s_star = float(brentq(mismatch, lo, hi, xtol=1e-13, rtol=4 * np.finfo(float).eps))
        s_prev, g_prev = s, g
    if s_star is None:
        raise ShootingDivergenceError("could not bracket the normalized shooting parameter")
    t_star = math.exp(s_star)
    r_star, _ = _first_zeros(e, t_star, rtol)
    mu = r_star / R
    a, b = scaling_exponents(e)
    return mu**a, mu**b * t_star


def solve_shooting(
    e: ExponentPair, R: float = 1.0, tol: float = 1e-8, grid: Optional[RadialGrid] = None
) -> SolutionPair:
    """
    Shooting oracle: find (M, N) so that the IVP from the Taylor start vanishes at r = R.

    The normalized problem u(0) = 1 and the scaling law give the starting point; a 2D Newton with a
    finite-difference Jacobian polishes (u(R), v(R)) to within tol·max(M, N).
    """
    if not 0 < tol <= 1e-6:
        raise ValueError(f"shooting tolerance must lie in (0, 1e-6], got {tol}")
    grid = grid or RadialGrid(R, 1024)
    if abs(grid.R - R) > 1e-14 * R:
        raise GridMismatchError(f"sampling grid has radius {grid.R}, expected {R}")
    rtol = tol / 10.0
    r0 = SHOOTING_START * R

    def boundary(M: float, N: float) -> np.ndarray:
        sol = _integrate(e, M, N, r0, R, rtol)
        return np.array([sol.y[0, -1], sol.y[2, -1]])

    M, N = _reduced_guess(e, R, rtol)
    logger.debug("shooting guess for %s: M=%.12g N=%.12g", e, M, N)
    S = boundary(M, N)
    iterations = 0
    while np.max(np.abs(S)) > tol * max(M, N):
        if iterations >= SHOOTING_MAX_ITER:
            raise ShootingDivergenceError(f"shooting Newton did not converge for {e}: |S| = {np.max(np.abs(S)):.3e}")
        dM, dN = 1e-7 * M, 1e-7 * N
        J = np.column_stack([(boundary(M + dM, N) - S) / dM, (boundary(M, N + dN) - S) / dN])
        try:
            step = np.linalg.solve(J, -S)
        except np.linalg.LinAlgError as err:
            raise ShootingDivergenceError(f"singular shooting Jacobian for {e}") from err
        alpha = 1.0
        while True:
            M_t, N_t = M + alpha * step[0], N + alpha * step[1]
            if M_t > 0 and N_t > 0:
                try:
                    S_t = boundary(M_t, N_t)
                except ShootingDivergenceError:
                    S_t = None
                if S_t is not None and np.max(np.abs(S_t)) < np.max(np.abs(S)):
                    M, N, S = M_t, N_t, S_t
                    break
            alpha *= 0.5
            if alpha < 1e-6:
                raise ShootingDivergenceError(f"shooting Newton stalled for {e} at (M, N) = ({M:.6g}, {N:.6g})")
        iterations += 1

    sol = _integrate(e, M, N, r0, R, rtol, t_eval=grid.nodes[1:], dense_output=False)
    u = np.empty(grid.n + 1)
    v = np.empty(grid.n + 1)
    u[0], v[0] = M, N
    u[1:], v[1:] = np.maximum(sol.y[0], 0.0), np.maximum(sol.y[2], 0.0)
    u[-1] = v[-1] = 0.0
    return SolutionPair(
        exponents=e,
        u=Field(grid, u),
        v=Field(grid, v),
        residual_norm=float(np.max(np.abs(S))) / max(M, N),
        newton_iterations=iterations,
        converged=True,
        tolerance=tol,
        method="shooting",
    )


def branch_agreement(newton: SolutionPair, shooting: SolutionPair) -> Tuple[float, float]:
    """Relative gaps |ΔM|/M and |ΔN|/N between two solutions of the same exponents."""
    if newton.exponents != shooting.exponents:
        raise SolverError("solutions belong to different exponent pairs")
    return abs(newton.M - shooting.M) / shooting.M, abs(newton.N - shooting.N) / shooting.N
