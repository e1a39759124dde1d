"""
Effective potential of point masses in a co-rotating frame.

The potential is

    F(p) = |p|^2 / 2 + sum_i m_i / |p - z_i|

and its critical points are the equilibria studied by the rest of the
package. Scalar entry points (`potential`, `gradient`, `hessian`) work on a
single point; the ``*_arrays`` helpers evaluate whole batches with numpy and
are what the solver and the contour export use.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import NamedTuple, Sequence, Union

import numpy as np

Number = Union[int, float, Fraction]

SINGULAR_CUTOFF = 1e-14


class SingularEvaluationError(ValueError):
    """Raised when the potential is evaluated on top of a point mass."""


class Vec2(NamedTuple):
    x: float
    y: float

    def norm(self) -> float:
        return math.hypot(self.x, self.y)

    def rotate(self, theta: float) -> "Vec2":
        c, s = math.cos(theta), math.sin(theta)
        return Vec2(c * self.x - s * self.y, s * self.x + c * self.y)


class SymMat2(NamedTuple):
    """Symmetric 2x2 matrix [[fxx, fxy], [fxy, fyy]]."""

    fxx: float
    fxy: float
    fyy: float

    @property
    def det(self) -> float:
        return self.fxx * self.fyy - self.fxy * self.fxy

    @property
    def trace(self) -> float:
        return self.fxx + self.fyy

    def eigenvalues(self) -> tuple[float, float]:
        half_tr = 0.5 * self.trace
        disc = math.hypot(0.5 * (self.fxx - self.fyy), self.fxy)
        return half_tr - disc, half_tr + disc


@dataclass(frozen=True)
class MassPoint:
    """A point mass. Coordinates and mass may be exact (Fraction) or float."""

    x: Number
    y: Number
    m: Number

    def __post_init__(self):
        for name in ("x", "y", "m"):
            v = getattr(self, name)
            if not math.isfinite(float(v)):
                raise ValueError(f"mass point field {name!r} is not finite: {v!r}")
        if not float(self.m) > 0:
            raise ValueError(f"mass must be positive, got {self.m!r}")


@dataclass(frozen=True)
class Configuration:
    """Ordered collection of n >= 1 point masses at pairwise distinct positions."""

    points: tuple[MassPoint, ...]
    xs: np.ndarray = field(init=False, repr=False, compare=False)
    ys: np.ndarray = field(init=False, repr=False, compare=False)
    ms: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        points = tuple(self.points)
        object.__setattr__(self, "points", points)
        if len(points) < 1:
            raise ValueError("a configuration needs at least one mass")
        xs = np.array([float(p.x) for p in points])
        ys = np.array([float(p.y) for p in points])
        ms = np.array([float(p.m) for p in points])
        for a in (xs, ys, ms):
            a.setflags(write=False)
        object.__setattr__(self, "xs", xs)
        object.__setattr__(self, "ys", ys)
        object.__setattr__(self, "ms", ms)
        if len(points) > 1 and self.min_distance() <= 0.0:
            raise ValueError("mass positions must be pairwise distinct")

    @classmethod
    def from_triples(cls, triples: Sequence[tuple[Number, Number, Number]]) -> "Configuration":
        return cls(tuple(MassPoint(x, y, m) for x, y, m in triples))

    @property
    def n(self) -> int:
        return len(self.points)

    @property
    def scale(self) -> float:
        """max(1, max_i |z_i|); the length unit used for tolerances."""
        return max(1.0, float(np.max(np.hypot(self.xs, self.ys))))

    @property
    def total_mass(self) -> float:
        return float(np.sum(self.ms))

    def positions(self) -> list[Vec2]:
        return [Vec2(float(x), float(y)) for x, y in zip(self.xs, self.ys)]

    def min_distance(self) -> float:
        """Smallest pairwise distance between masses (inf for a single mass)."""
        if self.n < 2:
            return math.inf
        dx = self.xs[:, None] - self.xs[None, :]
        dy = self.ys[:, None] - self.ys[None, :]
        d = np.hypot(dx, dy)
        iu = np.triu_indices(self.n, 1)
        return float(np.min(d[iu]))

    def rotated(self, theta: float) -> "Configuration":
        c, s = math.cos(theta), math.sin(theta)
        return Configuration(tuple(
            MassPoint(c * float(p.x) - s * float(p.y), s * float(p.x) + c * float(p.y), p.m)
            for p in self.points
        ))


@dataclass(frozen=True)
class SearchDomain:
    """Disc of radius R with a puncture of radius eps around every mass."""

    outer_radius: float
    puncture_radius: float
    centers: tuple[Vec2, ...]

    def contains(self, p: Vec2) -> bool:
        if math.hypot(p.x, p.y) >= self.outer_radius:
            return False
        return all(math.hypot(p.x - c.x, p.y - c.y) > self.puncture_radius for c in self.centers)


# -- batch evaluation -------------------------------------------------------

def _offsets(config: Configuration, X: np.ndarray, Y: np.ndarray):
    dx = X[..., None] - config.xs
    dy = Y[..., None] - config.ys
    r2 = dx * dx + dy * dy
    return dx, dy, r2


def potential_arrays(config: Configuration, X, Y) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    Y = np.asarray(Y, dtype=float)
    _, _, r2 = _offsets(config, X, Y)
    with np.errstate(divide="ignore"):
        return 0.5 * (X * X + Y * Y) + np.sum(config.ms / np.sqrt(r2), axis=-1)


def gradient_arrays(config: Configuration, X, Y) -> tuple[np.ndarray, np.ndarray]:
    X = np.asarray(X, dtype=float)
    Y = np.asarray(Y, dtype=float)
    dx, dy, r2 = _offsets(config, X, Y)
    with np.errstate(divide="ignore", invalid="ignore"):
        w3 = config.ms / (r2 * np.sqrt(r2))
    gx = X - np.sum(dx * w3, axis=-1)
    gy = Y - np.sum(dy * w3, axis=-1)
    return gx, gy


def derivatives_arrays(config: Configuration, X, Y):
    """Gradient and Hessian entries at every point: (gx, gy, hxx, hxy, hyy)."""
    X = np.asarray(X, dtype=float)
    Y = np.asarray(Y, dtype=float)
    dx, dy, r2 = _offsets(config, X, Y)
    with np.errstate(divide="ignore", invalid="ignore"):
        r = np.sqrt(r2)
        w3 = config.ms / (r2 * r)
        w5 = w3 / r2
    gx = X - np.sum(dx * w3, axis=-1)
    gy = Y - np.sum(dy * w3, axis=-1)
    hxx = 1.0 + np.sum(w5 * (2.0 * dx * dx - dy * dy), axis=-1)
    hyy = 1.0 + np.sum(w5 * (2.0 * dy * dy - dx * dx), axis=-1)
    hxy = 3.0 * np.sum(w5 * dx * dy, axis=-1)
    return gx, gy, hxx, hxy, hyy


# -- scalar API ---------------------------------------------------------------

def _check_regular(config: Configuration, p: Vec2, cutoff: float) -> None:
    d = np.hypot(p[0] - config.xs, p[1] - config.ys)
    i = int(np.argmin(d))
    if d[i] < cutoff * config.scale:
        raise SingularEvaluationError(
            f"point ({p[0]!r}, {p[1]!r}) coincides with mass {i} (distance {d[i]:.3g})"
        )


def potential(config: Configuration, p: Vec2, cutoff: float = SINGULAR_CUTOFF) -> float:
    _check_regular(config, p, cutoff)
    return float(potential_arrays(config, p[0], p[1]))


def gradient(config: Configuration, p: Vec2, cutoff: float = SINGULAR_CUTOFF) -> Vec2:
    _check_regular(config, p, cutoff)
    gx, gy = gradient_arrays(config, p[0], p[1])
    return Vec2(float(gx), float(gy))


def hessian(config: Configuration, p: Vec2, cutoff: float = SINGULAR_CUTOFF) -> SymMat2:
    _check_regular(config, p, cutoff)
    _, _, hxx, hxy, hyy = derivatives_arrays(config, p[0], p[1])
    return SymMat2(float(hxx), float(hxy), float(hyy))


def search_domain(config: Configuration) -> SearchDomain:
    """
    Punctured disc guaranteed to contain every equilibrium.

    On |p| = R the centrifugal term dominates because R >= 2 max|z_i| gives
    |p - z_i| >= R/2, so the attraction is at most 4 M / R^2 < R when
    R^3 >= 8 M. Near z_i the singular term m_i / eps^2 beats the bound B on
    everything else by a factor of two. Both boundary pieces therefore see an
    outward-pointing gradient.
    """
    radii = np.hypot(config.xs, config.ys)
    total = config.total_mass
    R = max(2.0 * float(np.max(radii)), (8.0 * total) ** (1.0 / 3.0), 1.0)
    d_min = config.min_distance() if config.n > 1 else R
    B = R + total / (0.5 * d_min) ** 2
    eps = min(0.25 * d_min, math.sqrt(float(np.min(config.ms)) / (2.0 * B)))
    return SearchDomain(R, eps, tuple(config.positions()))
