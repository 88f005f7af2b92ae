"""Tests for the five-point solver on rectangles."""

import numpy as np
import pytest

from lane_emden_lab.config import LinearSolver, PlanarSolveConfig
from lane_emden_lab.core import normal_derivative as core_normal_derivative
from lane_emden_lab.errors import GridMismatchError
from lane_emden_lab.models import DomainSpec, ExponentPair, RadialGrid
from lane_emden_lab.planar_solver import eigenfunction_guess, normal_derivative, product_cosine, solve_planar
from lane_emden_lab.radial_solver import solve_newton


class TestInitialGuess:
    """The scaled product-cosine start."""

    def test_should_vanish_on_boundary_ring(self, square_grid):
        """cos(πx/a)cos(πy/b) is zero on the ring and one at the center."""
        shape = product_cosine(square_grid)
        assert np.all(shape[0, :] == 0.0) and np.all(shape[:, -1] == 0.0)
        assert shape[16, 16] == pytest.approx(1.0)

    def test_should_be_positive_inside(self, square_grid):
        """Both components of the guess are positive on the unknowns."""
        x0 = eigenfunction_guess(ExponentPair(2.0, 3.0), square_grid)
        assert x0.size == 2 * square_grid.unknowns
        assert np.all(x0 > 0)


class TestSolvePlanar:
    """Damped Newton on the square."""

    def test_should_converge_to_positive_solution(self, square_solution):
        """(2, 2) on the unit square converges with zero boundary values."""
        s = square_solution
        assert s.converged
        assert not s.is_radial
        assert s.u.is_positive_solution_field()
        assert s.v.is_positive_solution_field()

    def test_should_peak_at_center(self, square_solution):
        """The maximum of a positive solution on a centered square is at the origin."""
        x, y = square_solution.u.argmax()
        assert x == pytest.approx(0.0, abs=1e-15) and y == pytest.approx(0.0, abs=1e-15)

    def test_should_respect_square_symmetries(self, square_solution):
        """u(x, y) = u(y, x) = u(-x, y)."""
        u = square_solution.u.values
        assert np.allclose(u, u.T, rtol=0.0, atol=1e-10 * u.max())
        assert np.allclose(u, u[::-1, :], rtol=0.0, atol=1e-10 * u.max())

    def test_should_agree_between_linear_solvers(self, square_grid, square_solution):
        """Jacobi-preconditioned GMRES and the direct solve reach the same solution."""
        cfg = PlanarSolveConfig(linear_solver=LinearSolver.ITERATIVE)
        iterative = solve_planar(ExponentPair(2.0, 2.0), square_grid, cfg)
        assert iterative.converged
        assert iterative.M == pytest.approx(square_solution.M, rel=1e-8)

    def test_should_stay_close_to_equal_area_disk(self, square_solution):
        """Max u on the square is within 20% of the equal-area disk value."""
        disk = DomainSpec.rectangle(1.0, 1.0).equal_area_disk()
        radial = solve_newton(ExponentPair(2.0, 2.0), RadialGrid(disk.radius, 256))
        assert square_solution.M == pytest.approx(radial.M, rel=0.2)

    def test_should_reject_radial_grid(self, coarse_disk_grid):
        """solve_planar works on planar grids only."""
        with pytest.raises(GridMismatchError):
            solve_planar(ExponentPair(2.0, 2.0), coarse_disk_grid)

    def test_should_reject_warm_start_from_other_grid(self, square_solution):
        """Planar warm starts must share the grid."""
        from lane_emden_lab.models import PlanarGrid

        other = PlanarGrid(DomainSpec.rectangle(1.0, 1.0), 17, 17)
        with pytest.raises(GridMismatchError):
            solve_planar(ExponentPair(2.0, 2.0), other, PlanarSolveConfig().with_warm_start(square_solution))


class TestNormalDerivativeExport:
    """The boundary trace is shared with the radial code."""

    def test_should_reexport_core_normal_derivative(self):
        """planar_solver.normal_derivative is the core implementation."""
        assert normal_derivative is core_normal_derivative

    def test_should_give_inward_flux_on_every_side(self, square_solution):
        """-v_ν ≥ 0 on all sides of the square."""
        trace = normal_derivative(square_solution.v)
        for side in ("left", "right", "bottom", "top"):
            assert np.all(trace.side(side) <= 1e-12)
