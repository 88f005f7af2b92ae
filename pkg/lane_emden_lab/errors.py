"""
Exception hierarchy for the Lane-Emden laboratory.
"""

from typing import Any, Optional


class LabError(Exception):
    """Base class for every error raised by the laboratory."""


class InvalidExponentsError(LabError, ValueError):
    """Exponents outside the superlinear regime p >= 1, q >= 1, pq > 1."""


class DomainError(LabError, ValueError):
    """A power was requested of a negative base."""


class GridMismatchError(LabError, ValueError):
    """Two fields (or a field and an eigenpair) live on different grids."""


class ConfigError(LabError, ValueError):
    """Invalid solver or lab configuration."""


class SolverError(LabError):
    """A solve failed; ``best`` holds the best iterate reached, if any."""

    def __init__(self, message: str, best: Optional[Any] = None) -> None:
        super().__init__(message)
        self.best = best


class NonConvergenceError(SolverError):
    """Newton (or continuation) did not reach the tolerance in effect."""


class PositivityLossError(SolverError):
    """An iterate went negative and backtracking could not recover it."""


class ShootingDivergenceError(SolverError):
    """The shooting integration or its root find left the admissible region."""


class IterationStagnationError(SolverError):
    """Inverse power iteration stopped improving before reaching its tolerance."""


class InsufficientDataError(LabError):
    """Too few converged rows for a fit or trend check."""


class ExportError(LabError):
    """Reading or writing a result file failed."""

    def __init__(self, path: Any, cause: BaseException) -> None:
        super().__init__(f"{path}: {cause}")
        self.path = path
        self.cause = cause
