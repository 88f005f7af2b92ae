"""
JSON persistence for solutions and diagnostics reports.

Floats are written with Python's shortest round-trip representation, so a read-back is bit-exact.
"""

import json
import logging
import math
from pathlib import Path
from typing import Any, Dict, Optional, Union

import numpy as np

from .errors import ExportError
from .models import DomainSpec, ExponentPair, Field, SolutionPair, grid_from_dict

logger = logging.getLogger(__name__)

SCHEMA_VERSION = "1"
PathLike = Union[str, Path]


def provenance(flags: Optional[Dict[str, Any]] = None) -> Dict[str, Any]:
    """Package name and version with the JSON-safe flags of the run."""
    from . import __version__

    return {"package": "lane-emden-lab", "version": __version__, "flags": jsonable(flags or {})}


def jsonable(obj: Any) -> Any:
    """Plain JSON types: numpy scalars unboxed, arrays listed, NaN/inf mapped to None."""
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, set, frozenset)):
        items = sorted(obj) if isinstance(obj, (set, frozenset)) else obj
        return [jsonable(v) for v in items]
    if isinstance(obj, np.ndarray):
        return [jsonable(v) for v in obj.tolist()]
    if isinstance(obj, np.generic):
        obj = obj.item()
    if isinstance(obj, float) and not math.isfinite(obj):
        return None
    if isinstance(obj, Path):
        return str(obj)
    return obj


def write_json(path: PathLike, data: Dict[str, Any]) -> Path:
    """Write indented JSON; OS errors become ExportError."""
    target = Path(path)
    try:
        with open(target, "w", encoding="utf-8") as f:
            json.dump(jsonable(data), f, indent=2, allow_nan=False)
    except (OSError, TypeError, ValueError) as e:
        raise ExportError(target, e) from e
    logger.debug("wrote %s", target)
    return target


def read_json(path: PathLike) -> Dict[str, Any]:
    """Read a JSON object written by this package and check its schema."""
    source = Path(path)
    try:
        with open(source, "r", encoding="utf-8") as f:
            data = json.load(f)
    except (OSError, json.JSONDecodeError) as e:
        raise ExportError(source, e) from e
    if not isinstance(data, dict):
        raise ExportError(source, ValueError("expected a JSON object"))
    schema = data.get("schema")
    if schema != SCHEMA_VERSION:
        raise ExportError(source, ValueError(f"unsupported schema {schema!r}, expected {SCHEMA_VERSION!r}"))
    return data


def solution_to_dict(s: SolutionPair, prov: Optional[Dict[str, Any]] = None) -> Dict[str, Any]:
    """Grid, exponents, nodal values and solver status of a solution."""
    return {
        "schema": SCHEMA_VERSION,
        "p": s.exponents.p,
        "q": s.exponents.q,
        "domain": s.domain.to_dict(),
        "grid": s.grid.to_dict(),
        "u": s.u.values,
        "v": s.v.values,
        "residual_norm": s.residual_norm,
        "iterations": s.newton_iterations,
        "converged": s.converged,
        "tolerance": s.tolerance,
        "method": s.method,
        "provenance": prov or provenance(),
    }


def solution_from_dict(data: Dict[str, Any]) -> SolutionPair:
    """Inverse of solution_to_dict."""
    grid = grid_from_dict(data["grid"])
    if grid.domain != DomainSpec.from_dict(data["domain"]):
        raise ValueError("solution domain and grid disagree")
    return SolutionPair(
        exponents=ExponentPair(data["p"], data["q"]),
        u=Field(grid, np.asarray(data["u"], dtype=float)),
        v=Field(grid, np.asarray(data["v"], dtype=float)),
        residual_norm=float(data["residual_norm"]),
        newton_iterations=int(data["iterations"]),
        converged=bool(data.get("converged", True)),
        tolerance=float(data.get("tolerance", 1e-10)),
        method=str(data.get("method", "newton")),
    )


def write_solution(s: SolutionPair, path: PathLike, prov: Optional[Dict[str, Any]] = None) -> Path:
    """Write a solution file."""
    return write_json(path, solution_to_dict(s, prov))


def read_solution(path: PathLike) -> SolutionPair:
    """Read a solution file written by write_solution."""
    data = read_json(path)
    try:
        return solution_from_dict(data)
    except (KeyError, TypeError, ValueError) as e:
        raise ExportError(path, e) from e


def write_report(report: Any, path: PathLike, prov: Optional[Dict[str, Any]] = None) -> Path:
    """Write a DiagnosticsReport (anything with ``to_dict``) under the common schema."""
    data = {"schema": SCHEMA_VERSION, **report.to_dict(), "provenance": prov or provenance()}
    return write_json(path, data)
