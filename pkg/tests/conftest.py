"""Shared grids and cached solutions for the Lane-Emden lab tests."""

import pytest

from lane_emden_lab.models import DomainSpec, ExponentPair, PlanarGrid, RadialGrid
from lane_emden_lab.planar_solver import solve_planar
from lane_emden_lab.radial_solver import continue_in_exponents, solve_newton
from lane_emden_lab.spectral import first_dirichlet_eigenpair


@pytest.fixture(scope="session")
def disk_grid():
    """Unit disk, 512 radial intervals."""
    return RadialGrid(1.0, 512)


@pytest.fixture(scope="session")
def coarse_disk_grid():
    return RadialGrid(1.0, 128)


@pytest.fixture(scope="session")
def square_grid():
    """Unit square with 31 interior nodes per side (the center is a node)."""
    return PlanarGrid(DomainSpec.rectangle(1.0, 1.0), 31, 31)


@pytest.fixture(scope="session")
def disk_eigenpair(disk_grid):
    return first_dirichlet_eigenpair(DomainSpec.disk(1.0), disk_grid)


@pytest.fixture(scope="session")
def solution_1_4(disk_grid):
    """Converged (p, q) = (1, 4) on the unit disk."""
    return solve_newton(ExponentPair(1.0, 4.0), disk_grid)


@pytest.fixture(scope="session")
def solution_2_2(disk_grid):
    return solve_newton(ExponentPair(2.0, 2.0), disk_grid)


@pytest.fixture(scope="session")
def solution_1_16(disk_grid):
    """(1, 16) reached by continuation from the base pair."""
    return continue_in_exponents(ExponentPair(1.0, 16.0), disk_grid)


@pytest.fixture(scope="session")
def square_solution(square_grid):
    return solve_planar(ExponentPair(2.0, 2.0), square_grid)
