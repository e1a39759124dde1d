"""File formats: configuration JSON, result JSON, contour CSV."""

from __future__ import annotations

import io
import json
import math
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Any, Sequence, Union

import numpy as np

from .model import Configuration, MassPoint, Number, potential_arrays
from .solver import Equilibrium, MorseReport

DEFAULT_CAP = 50.0


class ConfigError(ValueError):
    """Malformed configuration document; the message names the bad field."""


def _number(value: Any, where: str) -> Number:
    if isinstance(value, bool):
        raise ConfigError(f"{where}: expected a number, got a boolean")
    if isinstance(value, (int, Fraction)):
        return value
    if isinstance(value, float):
        if not math.isfinite(value):
            raise ConfigError(f"{where}: value is not finite")
        return value
    if isinstance(value, str):
        try:
            return Fraction(value.strip())
        except (ValueError, ZeroDivisionError):
            raise ConfigError(f"{where}: cannot parse {value!r} as a number or p/q") from None
    raise ConfigError(f"{where}: expected a number, got {type(value).__name__}")


def config_from_dict(doc: Any) -> Configuration:
    if not isinstance(doc, dict):
        raise ConfigError("top level: expected a JSON object with a 'masses' list")
    masses = doc.get("masses")
    if not isinstance(masses, list):
        raise ConfigError("masses: expected a list of {x, y, m} objects")
    if not masses:
        raise ConfigError("masses: at least one mass is required")
    points = []
    for i, entry in enumerate(masses):
        where = f"masses[{i}]"
        if not isinstance(entry, dict):
            raise ConfigError(f"{where}: expected an object with fields x, y, m")
        vals = {}
        for key in ("x", "y", "m"):
            if key not in entry:
                raise ConfigError(f"{where}.{key}: missing field")
            vals[key] = _number(entry[key], f"{where}.{key}")
        if not float(vals["m"]) > 0:
            raise ConfigError(f"{where}.m: mass must be positive")
        points.append(MassPoint(vals["x"], vals["y"], vals["m"]))
    try:
        return Configuration(tuple(points))
    except ValueError as exc:
        raise ConfigError(f"masses: {exc}") from None


def parse_config(text: str) -> Configuration:
    try:
        # decimal literals are kept exact
        doc = json.loads(text, parse_float=Fraction)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON: {exc}") from None
    return config_from_dict(doc)


def load_config(path: Union[str, Path]) -> Configuration:
    return parse_config(Path(path).read_text())


def _json_number(v: Number):
    """Exact values stay exact: integers, short decimals, otherwise "p/q"."""
    if not isinstance(v, Fraction):
        return v
    if v.denominator == 1:
        return int(v)
    as_float = float(v)
    if Fraction(repr(as_float)) == v:
        return as_float
    return str(v)


def config_to_dict(config: Configuration) -> dict:
    return {"masses": [{"x": _json_number(p.x), "y": _json_number(p.y), "m": _json_number(p.m)}
                       for p in config.points]}


def result_to_dict(config: Configuration, equilibria: Sequence[Equilibrium], report: MorseReport) -> dict:
    """
    Result document. It embeds the configuration under "masses", so a
    result file can be fed back in wherever a configuration is expected.
    """
    doc = {"n": config.n}
    doc.update(config_to_dict(config))
    doc["equilibria"] = [eq.to_dict() for eq in equilibria]
    doc["report"] = report.to_dict()
    return doc


def dumps(doc: dict) -> str:
    return json.dumps(doc, indent=2) + "\n"


@dataclass(frozen=True)
class ContourGrid:
    x_min: float
    x_max: float
    y_min: float
    y_max: float
    resolution: int
    values: np.ndarray  # shape (resolution, resolution), row i is y_i

    @property
    def xs(self) -> np.ndarray:
        return np.linspace(self.x_min, self.x_max, self.resolution)

    @property
    def ys(self) -> np.ndarray:
        return np.linspace(self.y_min, self.y_max, self.resolution)

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("y\\x," + ",".join(repr(float(x)) for x in self.xs) + "\n")
        for y, row in zip(self.ys, self.values):
            buf.write(repr(float(y)) + "," + ",".join(repr(float(v)) for v in row) + "\n")
        return buf.getvalue()


def parse_contour_csv(text: str) -> ContourGrid:
    rows = [line.split(",") for line in text.strip().splitlines()]
    xs = np.array([float(v) for v in rows[0][1:]])
    ys = np.array([float(r[0]) for r in rows[1:]])
    vals = np.array([[float(v) for v in r[1:]] for r in rows[1:]])
    return ContourGrid(xs[0], xs[-1], ys[0], ys[-1], len(xs), vals)


def contour_grid(config: Configuration, x_min: float, x_max: float, y_min: float, y_max: float,
                 resolution: int, cap: float = DEFAULT_CAP) -> ContourGrid:
    """Potential sampled on a resolution x resolution lattice, clamped at ``cap``."""
    if int(resolution) != resolution or resolution < 2:
        raise ValueError("resolution must be an integer >= 2")
    if not (x_min < x_max and y_min < y_max):
        raise ValueError("contour bounds must satisfy xmin < xmax and ymin < ymax")
    if not all(math.isfinite(v) for v in (x_min, x_max, y_min, y_max)):
        raise ValueError("contour bounds must be finite")
    if not cap > 0:
        raise ValueError("cap must be positive")
    xs = np.linspace(x_min, x_max, int(resolution))
    ys = np.linspace(y_min, y_max, int(resolution))
    X, Y = np.meshgrid(xs, ys)
    with np.errstate(divide="ignore", invalid="ignore"):
        V = potential_arrays(config, X, Y)
    V = np.where(np.isfinite(V), np.minimum(V, cap), cap)
    return ContourGrid(float(x_min), float(x_max), float(y_min), float(y_max), int(resolution), V)
