"""
Solver and laboratory configuration.

Defaults live in the dataclasses; ``lab_config.json`` overrides them section by section.
"""

import json
import logging
import math
from dataclasses import asdict, dataclass, field, fields, replace
from enum import Enum
from pathlib import Path
from typing import Any, Dict, Optional, Union

from .errors import ConfigError
from .models import SolutionPair

logger = logging.getLogger(__name__)

DEFAULT_CONFIG_PATH = "lab_config.json"


class InitStrategy(str, Enum):
    EIGENFUNCTION = "eigenfunction"
    WARM_START = "warm_start"


class LinearSolver(str, Enum):
    DIRECT = "direct"
    ITERATIVE = "iterative"


@dataclass(frozen=True)
class RadialSolveConfig:
    """Damped Newton settings. ``warm_start`` switches initialization from the scaled eigenfunction."""

    tol: float = 1e-10
    max_iter: int = 200
    damping: float = 0.5
    min_step: float = 2.0**-20
    armijo: float = 1e-4
    warm_start: Optional[SolutionPair] = field(default=None, compare=False, repr=False)

    def __post_init__(self) -> None:
        if not 0 < self.tol <= 1e-4:
            raise ConfigError(f"tol must lie in (0, 1e-4], got {self.tol}")
        if int(self.max_iter) != self.max_iter or self.max_iter < 1:
            raise ConfigError(f"max_iter must be a positive integer, got {self.max_iter}")
        if not 0 < self.damping < 1:
            raise ConfigError(f"damping must lie in (0, 1), got {self.damping}")
        if not 0 < self.min_step <= 1:
            raise ConfigError(f"min_step must lie in (0, 1], got {self.min_step}")
        if not 0 < self.armijo < 1:
            raise ConfigError(f"armijo must lie in (0, 1), got {self.armijo}")

    @property
    def init(self) -> InitStrategy:
        """Where Newton starts: the eigenfunction guess or the warm start."""
        return InitStrategy.EIGENFUNCTION if self.warm_start is None else InitStrategy.WARM_START

    def with_warm_start(self, solution: Optional[SolutionPair]) -> "RadialSolveConfig":
        """Copy of this config starting from ``solution``, or from the eigenfunction guess for None."""
        return replace(self, warm_start=solution)

    def to_dict(self) -> Dict[str, Any]:
        """Plain settings for provenance; the warm start is left out."""
        data = {f.name: getattr(self, f.name) for f in fields(self) if f.name != "warm_start"}
        for key, value in data.items():
            if isinstance(value, Enum):
                data[key] = value.value
        return data


@dataclass(frozen=True)
class PlanarSolveConfig(RadialSolveConfig):
    """Adds the choice of linear solver for the Newton steps on rectangles."""

    linear_solver: LinearSolver = LinearSolver.DIRECT
    linear_tol: float = 1e-12

    def __post_init__(self) -> None:
        super().__post_init__()
        try:
            object.__setattr__(self, "linear_solver", LinearSolver(self.linear_solver))
        except ValueError as e:
            raise ConfigError(str(e)) from e
        if not 0 < self.linear_tol < 1:
            raise ConfigError(f"linear_tol must lie in (0, 1), got {self.linear_tol}")


@dataclass(frozen=True)
class ContinuationConfig:
    """Geometric continuation in the exponents."""

    step: float = 2.0**0.25
    min_step: float = 2.0 ** (1.0 / 64.0)

    def __post_init__(self) -> None:
        if not self.step > self.min_step > 1:
            raise ConfigError(f"need step > min_step > 1, got step={self.step}, min_step={self.min_step}")


@dataclass(frozen=True)
class DiagnosticsConfig:
    delta: float = 2.0 * math.pi
    identity_tol: float = 1e-3
    checks: str = "all"

    def __post_init__(self) -> None:
        if not 0 < self.delta < 4 * math.pi:
            raise ConfigError(f"delta must lie in (0, 4π), got {self.delta}")
        if not self.identity_tol > 0:
            raise ConfigError(f"identity_tol must be positive, got {self.identity_tol}")


@dataclass(frozen=True)
class SweepConfig:
    fit_q_min: float = 16.0
    ratio_q_min: float = 64.0
    jobs: int = 1
    warm_start: bool = True

    def __post_init__(self) -> None:
        if int(self.jobs) != self.jobs or self.jobs < 1:
            raise ConfigError(f"jobs must be a positive integer, got {self.jobs}")


@dataclass(frozen=True)
class GridConfig:
    radial_n: int = 1024
    planar_n: int = 127

    def __post_init__(self) -> None:
        if self.radial_n < 16 or self.planar_n < 16:
            raise ConfigError("grids need at least 16 nodes per direction")


@dataclass(frozen=True)
class LabConfig:
    """Everything ``lab_config.json`` can set."""

    radial_solver: RadialSolveConfig = field(default_factory=RadialSolveConfig)
    planar_solver: PlanarSolveConfig = field(default_factory=PlanarSolveConfig)
    continuation: ContinuationConfig = field(default_factory=ContinuationConfig)
    diagnostics: DiagnosticsConfig = field(default_factory=DiagnosticsConfig)
    sweeps: SweepConfig = field(default_factory=SweepConfig)
    grids: GridConfig = field(default_factory=GridConfig)

    def to_dict(self) -> Dict[str, Dict[str, Any]]:
        """Every section as plain data, in lab_config.json layout."""
        return {
            "radial_solver": self.radial_solver.to_dict(),
            "planar_solver": self.planar_solver.to_dict(),
            "continuation": asdict(self.continuation),
            "diagnostics": asdict(self.diagnostics),
            "sweeps": asdict(self.sweeps),
            "grids": asdict(self.grids),
        }


_SECTIONS = {
    "radial_solver": RadialSolveConfig,
    "planar_solver": PlanarSolveConfig,
    "continuation": ContinuationConfig,
    "diagnostics": DiagnosticsConfig,
    "sweeps": SweepConfig,
    "grids": GridConfig,
}


def config_from_dict(data: Dict[str, Any]) -> LabConfig:
    """Build a LabConfig; missing keys keep their defaults, unknown keys are rejected."""
    unknown = set(data) - set(_SECTIONS)
    if unknown:
        raise ConfigError(f"unknown config sections: {sorted(unknown)}")
    sections = {}
    for name, cls in _SECTIONS.items():
        values = data.get(name, {})
        if not isinstance(values, dict):
            raise ConfigError(f"section '{name}' must be an object")
        allowed = {f.name for f in fields(cls) if f.name != "warm_start"}
        bad = set(values) - allowed
        if bad:
            raise ConfigError(f"unknown keys in '{name}': {sorted(bad)}")
        try:
            sections[name] = cls(**values)
        except TypeError as e:
            raise ConfigError(f"section '{name}': {e}") from e
    return LabConfig(**sections)


def load_config(path: Union[str, Path, None] = None) -> LabConfig:
    """Read a JSON config file; no path means defaults."""
    if path is None:
        return LabConfig()
    try:
        with open(path, "r", encoding="utf-8") as f:
            data = json.load(f)
    except (OSError, json.JSONDecodeError) as e:
        raise ConfigError(f"could not read config {path}: {e}") from e
    if not isinstance(data, dict):
        raise ConfigError(f"config {path} must hold a JSON object")
    logger.debug("Loaded configuration from %s", path)
    return config_from_dict(data)


def create_sample_config(path: Union[str, Path] = DEFAULT_CONFIG_PATH) -> Path:
    """Write the default configuration as JSON and return its path."""
    target = Path(path)
    with open(target, "w", encoding="utf-8") as f:
        json.dump(LabConfig().to_dict(), f, indent=2)
    return target
