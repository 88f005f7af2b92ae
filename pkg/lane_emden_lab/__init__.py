"""
Lane-Emden Lab

A numerical laboratory for positive solutions of the 2D Lane-Emden system
-Δu = v^p, -Δv = u^q with zero boundary data on disks and rectangles:
finite-difference Newton solvers, a shooting oracle, the first Dirichlet
eigenpair, identity and inequality diagnostics, and exponent sweeps.
"""

from .config import LabConfig, PlanarSolveConfig, RadialSolveConfig, create_sample_config, load_config
from .core import classify, integrate, normal_derivative, stable_pow
from .diagnostics import DiagnosticsReport, run_diagnostics
from .errors import (
    GridMismatchError,
    InvalidExponentsError,
    LabError,
    NonConvergenceError,
    PositivityLossError,
    SolverError,
)
from .models import Criticality, DomainSpec, Eigenpair, ExponentPair, Field, PlanarGrid, RadialGrid, SolutionPair
from .planar_solver import solve_planar
from .radial_solver import continue_in_exponents, solve_newton, solve_shooting, solve_with_fallback
from .spectral import first_dirichlet_eigenpair
from .sweeps import Diagonal, FixedP, PowerRay, Ray, SweepPlan, SweepTable, export, fit_logarithmic, run_sweep

__version__ = "0.1.0"
__all__ = [
    "Criticality",
    "DomainSpec",
    "ExponentPair",
    "RadialGrid",
    "PlanarGrid",
    "Field",
    "SolutionPair",
    "Eigenpair",
    "classify",
    "stable_pow",
    "integrate",
    "normal_derivative",
    "solve_newton",
    "solve_planar",
    "solve_shooting",
    "solve_with_fallback",
    "continue_in_exponents",
    "first_dirichlet_eigenpair",
    "run_diagnostics",
    "DiagnosticsReport",
    "FixedP",
    "Diagonal",
    "Ray",
    "PowerRay",
    "SweepPlan",
    "SweepTable",
    "run_sweep",
    "fit_logarithmic",
    "export",
    "LabConfig",
    "RadialSolveConfig",
    "PlanarSolveConfig",
    "load_config",
    "create_sample_config",
    "LabError",
    "InvalidExponentsError",
    "GridMismatchError",
    "SolverError",
    "NonConvergenceError",
    "PositivityLossError",
]
