"""
Core data types for the Lane-Emden laboratory.
"""

import math
from dataclasses import dataclass, field
from enum import Enum
from functools import cached_property
from typing import Any, Dict, Optional, Tuple, Union

import numpy as np

from .errors import GridMismatchError, InvalidExponentsError

MIN_NODES = 16


class Criticality(str, Enum):
    """Position of an exponent pair relative to the critical hyperbola."""

    SUBCRITICAL = "subcritical"
    CRITICAL = "critical"
    SUPERCRITICAL = "supercritical"


@dataclass(frozen=True)
class ExponentPair:
    """The exponents (p, q) of -Δu = v^p, -Δv = u^q, restricted to the superlinear regime."""

    p: float
    q: float
    rho: float = field(init=False, compare=False)

    def __post_init__(self) -> None:
        p, q = float(self.p), float(self.q)
        if not (math.isfinite(p) and math.isfinite(q)):
            raise InvalidExponentsError(f"exponents must be finite, got p={p}, q={q}")
        if p < 1 or q < 1 or p * q <= 1:
            raise InvalidExponentsError(f"superlinear regime requires p >= 1, q >= 1 and pq > 1; got p={p}, q={q}")
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "q", q)
        object.__setattr__(self, "rho", max(p / q, q / p))

    @property
    def kappa(self) -> float:
        """Superlinearity margin pq - 1."""
        return self.p * self.q - 1.0

    def swapped(self) -> "ExponentPair":
        """(q, p); solutions of the swapped pair are (v, u)."""
        return ExponentPair(self.q, self.p)

    def to_dict(self) -> Dict[str, float]:
        """{"p": p, "q": q}."""
        return {"p": self.p, "q": self.q}


class DomainShape(str, Enum):
    DISK = "disk"
    RECTANGLE = "rect"


@dataclass(frozen=True)
class DomainSpec:
    """Origin-centered disk of radius ``radius`` or rectangle ``a`` x ``b``."""

    shape: DomainShape
    radius: Optional[float] = None
    a: Optional[float] = None
    b: Optional[float] = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "shape", DomainShape(self.shape))
        if self.shape is DomainShape.DISK:
            if self.radius is None or not self.radius > 0:
                raise ValueError(f"disk radius must be positive, got {self.radius}")
            object.__setattr__(self, "radius", float(self.radius))
            object.__setattr__(self, "a", None)
            object.__setattr__(self, "b", None)
        else:
            if self.a is None or self.b is None or not (self.a > 0 and self.b > 0):
                raise ValueError(f"rectangle sides must be positive, got a={self.a}, b={self.b}")
            object.__setattr__(self, "a", float(self.a))
            object.__setattr__(self, "b", float(self.b))
            object.__setattr__(self, "radius", None)

    @classmethod
    def disk(cls, radius: float = 1.0) -> "DomainSpec":
        """Origin-centered disk of the given radius."""
        return cls(DomainShape.DISK, radius=radius)

    @classmethod
    def rectangle(cls, a: float = 1.0, b: float = 1.0) -> "DomainSpec":
        """Origin-centered rectangle (-a/2, a/2) × (-b/2, b/2)."""
        return cls(DomainShape.RECTANGLE, a=a, b=b)

    @property
    def is_disk(self) -> bool:
        return self.shape is DomainShape.DISK

    @property
    def diameter(self) -> float:
        if self.is_disk:
            return 2.0 * self.radius
        return math.hypot(self.a, self.b)

    @property
    def area(self) -> float:
        if self.is_disk:
            return math.pi * self.radius**2
        return self.a * self.b

    @property
    def star_shaped(self) -> bool:
        # Both shapes are convex and centered at the origin.
        return True

    def equal_area_disk(self) -> "DomainSpec":
        """Disk with the same area, for comparisons across shapes."""
        return DomainSpec.disk(math.sqrt(self.area / math.pi))

    def to_dict(self) -> Dict[str, Any]:
        """Shape and dimensions as plain data."""
        if self.is_disk:
            return {"shape": self.shape.value, "radius": self.radius}
        return {"shape": self.shape.value, "a": self.a, "b": self.b}

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "DomainSpec":
        """Inverse of to_dict."""
        shape = DomainShape(data["shape"])
        if shape is DomainShape.DISK:
            return cls.disk(data["radius"])
        return cls.rectangle(data["a"], data["b"])


@dataclass(frozen=True)
class RadialGrid:
    """Uniform nodes r_i = i*h, i = 0..n, on [0, R]; node n is the boundary."""

    R: float
    n: int

    def __post_init__(self) -> None:
        if not self.R > 0:
            raise ValueError(f"radius must be positive, got {self.R}")
        if int(self.n) != self.n or self.n < MIN_NODES:
            raise ValueError(f"radial grid needs an integer n >= {MIN_NODES}, got {self.n}")
        object.__setattr__(self, "R", float(self.R))
        object.__setattr__(self, "n", int(self.n))

    @property
    def h(self) -> float:
        return self.R / self.n

    @cached_property
    def nodes(self) -> np.ndarray:
        r = np.arange(self.n + 1, dtype=float) * self.h
        r[-1] = self.R
        r.setflags(write=False)
        return r

    @property
    def shape(self) -> Tuple[int]:
        return (self.n + 1,)

    @property
    def unknowns(self) -> int:
        return self.n

    @property
    def domain(self) -> DomainSpec:
        return DomainSpec.disk(self.R)

    @property
    def resolution(self) -> int:
        return self.n

    def interior(self, values: np.ndarray) -> np.ndarray:
        """Unknown nodes 0..n-1 (the center is an unknown, the rim is not)."""
        return np.asarray(values)[:-1]

    def embed(self, unknowns: np.ndarray, boundary: float = 0.0) -> np.ndarray:
        """Nodal array from the unknowns with the boundary value appended."""
        full = np.empty(self.n + 1)
        full[:-1] = unknowns
        full[-1] = boundary
        return full

    def to_dict(self) -> Dict[str, Any]:
        return {"kind": "radial", "R": self.R, "n": self.n}


@dataclass(frozen=True)
class PlanarGrid:
    """Uniform grid on the centered rectangle; values are stored with their boundary ring, indexed [i, j]."""

    domain: DomainSpec
    nx: int
    ny: int

    def __post_init__(self) -> None:
        if self.domain.is_disk:
            raise ValueError("planar grids are built on rectangles")
        for name, count in (("nx", self.nx), ("ny", self.ny)):
            if int(count) != count or count < MIN_NODES:
                raise ValueError(f"{name} must be an integer >= {MIN_NODES}, got {count}")
        object.__setattr__(self, "nx", int(self.nx))
        object.__setattr__(self, "ny", int(self.ny))

    @property
    def hx(self) -> float:
        return self.domain.a / (self.nx + 1)

    @property
    def hy(self) -> float:
        return self.domain.b / (self.ny + 1)

    @cached_property
    def x(self) -> np.ndarray:
        xs = -0.5 * self.domain.a + self.hx * np.arange(self.nx + 2)
        xs[-1] = 0.5 * self.domain.a
        xs.setflags(write=False)
        return xs

    @cached_property
    def y(self) -> np.ndarray:
        ys = -0.5 * self.domain.b + self.hy * np.arange(self.ny + 2)
        ys[-1] = 0.5 * self.domain.b
        ys.setflags(write=False)
        return ys

    @property
    def shape(self) -> Tuple[int, int]:
        return (self.nx + 2, self.ny + 2)

    @property
    def unknowns(self) -> int:
        return self.nx * self.ny

    @property
    def resolution(self) -> int:
        return min(self.nx, self.ny)

    def interior_index(self, i: int, j: int) -> int:
        """Lexicographic index of interior node (i, j), 1 <= i <= nx, 1 <= j <= ny."""
        if not (1 <= i <= self.nx and 1 <= j <= self.ny):
            raise IndexError(f"({i}, {j}) is not an interior node")
        return (i - 1) * self.ny + (j - 1)

    def interior(self, values: np.ndarray) -> np.ndarray:
        """Unknowns of a nodal array, flattened."""
        return np.asarray(values)[1:-1, 1:-1].ravel()

    def embed(self, unknowns: np.ndarray, boundary: float = 0.0) -> np.ndarray:
        """Nodal array from flattened unknowns, boundary ring set to ``boundary``."""
        full = np.full(self.shape, boundary, dtype=float)
        full[1:-1, 1:-1] = np.asarray(unknowns).reshape(self.nx, self.ny)
        return full

    def to_dict(self) -> Dict[str, Any]:
        return {"kind": "planar", "nx": self.nx, "ny": self.ny, **self.domain.to_dict()}


Grid = Union[RadialGrid, PlanarGrid]


def grid_from_dict(data: Dict[str, Any]) -> Grid:
    """Rebuild a radial or planar grid from its to_dict form."""
    if data["kind"] == "radial":
        return RadialGrid(data["R"], data["n"])
    return PlanarGrid(DomainSpec.rectangle(data["a"], data["b"]), data["nx"], data["ny"])


def domain_of(grid: Grid) -> DomainSpec:
    """The domain a grid discretizes."""
    return grid.domain


@dataclass(frozen=True, eq=False)
class Field:
    """Nodal values (boundary included) of one solution component on a grid."""

    grid: Grid
    values: np.ndarray

    def __post_init__(self) -> None:
        values = np.array(self.values, dtype=float)
        if values.shape != self.grid.shape:
            raise GridMismatchError(f"field shape {values.shape} does not match grid shape {self.grid.shape}")
        if not np.all(np.isfinite(values)):
            raise ValueError("field values must be finite")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @property
    def max(self) -> float:
        """Largest nodal value."""
        return float(np.max(self.values))

    def argmax(self) -> Tuple[float, ...]:
        """Location of the maximum; ties go to the smallest radius or lexicographic index."""
        k = int(np.argmax(self.values))
        if isinstance(self.grid, RadialGrid):
            return (float(self.grid.nodes[k]),)
        i, j = np.unravel_index(k, self.grid.shape)
        return (float(self.grid.x[i]), float(self.grid.y[j]))

    def interior_values(self) -> np.ndarray:
        """Values at the unknown nodes."""
        return self.grid.interior(self.values)

    def boundary_values(self) -> np.ndarray:
        """Values on the boundary nodes."""
        if isinstance(self.grid, RadialGrid):
            return self.values[-1:]
        v = self.values
        return np.concatenate([v[0, :], v[-1, :], v[1:-1, 0], v[1:-1, -1]])

    def is_positive_solution_field(self) -> bool:
        """Positive at every unknown node and zero on the boundary."""
        return bool(np.all(self.interior_values() > 0) and np.all(self.boundary_values() == 0))


@dataclass(frozen=True, eq=False)
class SolutionPair:
    """Discrete (u, v) on one grid with the metadata of the solve that produced it."""

    exponents: ExponentPair
    u: Field
    v: Field
    residual_norm: float
    newton_iterations: int
    converged: bool
    tolerance: float = 1e-10
    method: str = "newton"

    def __post_init__(self) -> None:
        if self.u.grid != self.v.grid:
            raise GridMismatchError("u and v must share one grid")

    @property
    def grid(self) -> Grid:
        return self.u.grid

    @property
    def domain(self) -> DomainSpec:
        return self.grid.domain

    @property
    def is_radial(self) -> bool:
        return isinstance(self.grid, RadialGrid)

    @property
    def M(self) -> float:
        return self.u.max

    @property
    def N(self) -> float:
        return self.v.max


@dataclass(frozen=True, eq=False)
class Eigenpair:
    """First Dirichlet eigenvalue (extrapolated) and the L1-normalized positive eigenfunction."""

    lambda_: float
    phi: Field
    discrete_lambda: float
    iterations: int = 0
    stagnated: bool = False

    def __post_init__(self) -> None:
        if not self.lambda_ > 0 or not self.discrete_lambda > 0:
            raise ValueError("Dirichlet eigenvalues are positive")

    @property
    def grid(self) -> Grid:
        return self.phi.grid
