"""
Named configuration families with known equilibrium counts.

* Collinear: unit masses at (z_i, z_i), 0 < z_1 < ... < z_n. Equilibria lie
  on the diagonal only, and the diagonal force is strictly increasing between
  consecutive masses, so there is exactly one equilibrium per interval:
  n + 1 in total.
* Lagrange: two masses in circular orbit, scaled to unit angular speed.
* Triangle: three equal masses on an equilateral triangle, same scaling.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.optimize import bisect

from .model import Configuration, MassPoint, Number, SingularEvaluationError, Vec2


class BracketError(ArithmeticError):
    """An interval that must contain a root showed no sign change."""


@dataclass(frozen=True)
class CollinearConfig:
    diagonal_positions: tuple[float, ...]

    def __post_init__(self):
        z = tuple(float(v) for v in self.diagonal_positions)
        object.__setattr__(self, "diagonal_positions", z)
        if not z:
            raise ValueError("need at least one diagonal position")
        if z[0] <= 0 or any(b <= a for a, b in zip(z, z[1:])):
            raise ValueError("diagonal positions must be positive and strictly increasing")

    @property
    def n(self) -> int:
        return len(self.diagonal_positions)

    def to_configuration(self) -> Configuration:
        return Configuration(tuple(MassPoint(z, z, 1) for z in self.diagonal_positions))


def collinear_f(config: CollinearConfig, x):
    """F_x(x, x) = x - sum_i (x - z_i) / (2 (x - z_i)^2)^(3/2)."""
    x = np.asarray(x, dtype=float)
    z = np.asarray(config.diagonal_positions)
    d = x[..., None] - z
    if np.any(d == 0):
        raise SingularEvaluationError("collinear_f evaluated at a mass position")
    out = x - np.sum(d / (2.0 * d * d) ** 1.5, axis=-1)
    return float(out) if out.ndim == 0 else out


def collinear_f_prime(config: CollinearConfig, x):
    """1 + sum_i 1 / (sqrt(2) |x - z_i|^3); positive away from the masses."""
    x = np.asarray(x, dtype=float)
    d = np.abs(x[..., None] - np.asarray(config.diagonal_positions))
    out = 1.0 + np.sum(1.0 / (math.sqrt(2.0) * d ** 3), axis=-1)
    return float(out) if out.ndim == 0 else out


def _bisect(f, lo: float, hi: float) -> float:
    return bisect(f, lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=200)


def _find_sign(f, anchor: float, direction: float, want_positive: bool, start: float,
               grow: bool) -> float:
    """Walk away from (grow) or toward (shrink) ``anchor`` until f has the wanted sign."""
    offset = start
    for _ in range(200):
        x = anchor + direction * offset
        v = f(x)
        if (v > 0) == want_positive and v != 0:
            return x
        offset = offset * 2.0 if grow else offset * 0.5
    raise BracketError(f"no sign change found next to {anchor!r}")


def collinear_roots(config: CollinearConfig) -> list[float]:
    """Root of the diagonal force in each of the n + 1 intervals cut by the masses."""
    z = config.diagonal_positions
    f = lambda t: collinear_f(config, t)  # noqa: E731
    roots = []
    # (-inf, z_1): f -> -inf far left, f -> +inf just left of z_1
    hi = _find_sign(f, z[0], -1.0, True, 1e-3, grow=False)
    lo = _find_sign(f, z[0], -1.0, False, 1.0, grow=True)
    roots.append(_bisect(f, lo, hi))
    for a, b in zip(z, z[1:]):
        half = 0.5 * (b - a)
        lo = _find_sign(f, a, 1.0, False, half, grow=False)
        hi = _find_sign(f, b, -1.0, True, half, grow=False)
        if not lo < hi:
            raise BracketError(f"brackets crossed in ({a}, {b})")
        roots.append(_bisect(f, lo, hi))
    lo = _find_sign(f, z[-1], 1.0, False, 1e-3, grow=False)
    hi = _find_sign(f, z[-1], 1.0, True, 1.0, grow=True)
    roots.append(_bisect(f, lo, hi))
    return roots


def collinear_equilibria(config: CollinearConfig) -> list[Vec2]:
    return [Vec2(r, r) for r in collinear_roots(config)]


def lagrange_config(m1: Number, m2: Number) -> Configuration:
    """
    Two primaries on a circular orbit with unit angular speed: separation
    d = (m1 + m2)^(1/3), centre of mass at the origin, both on the x-axis.
    """
    if not float(m1) > 0 or not float(m2) > 0:
        raise ValueError("Lagrange masses must be positive")
    total = float(m1) + float(m2)
    d = total ** (1.0 / 3.0)
    return Configuration((
        MassPoint(-float(m2) * d / total, 0.0, m1),
        MassPoint(float(m1) * d / total, 0.0, m2),
    ))


def triangle_config(m: Number) -> Configuration:
    """
    Three masses m on an equilateral triangle of side (3m)^(1/3) centred on
    the origin, one vertex on the positive x-axis.
    """
    if not float(m) > 0:
        raise ValueError("triangle mass must be positive")
    side = (3.0 * float(m)) ** (1.0 / 3.0)
    rc = side / math.sqrt(3.0)
    return Configuration(tuple(
        MassPoint(rc * math.cos(2 * k * math.pi / 3), rc * math.sin(2 * k * math.pi / 3), m)
        for k in range(3)
    ))


def collinear_config(positions: Sequence[float]) -> CollinearConfig:
    return CollinearConfig(tuple(positions))
