"""
Ring configurations: one mass at the origin and n-1 equal masses on a
regular polygon.

Equilibria come in two ray families. Type A rays pass through a peripheral
mass (angles 2k*pi/(n-1)); type B rays bisect two neighbours (angles
(2k+1)*pi/(n-1)). Along either ray the transverse force cancels by
reflection symmetry, so the equilibria on it are roots of a scalar radial
force which we bracket by a dense sign scan and bisect.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy.optimize import bisect

from .model import Configuration, MassPoint, Number, SingularEvaluationError, search_domain
from .solver import Equilibrium, SolveOptions, find_equilibria

SCAN_STEP = 1e-4  # relative to the ring radius
SCAN_CUTOFF = 1e-6  # relative to the ring radius
ANGLE_TOL = 1e-8


class RayKind(enum.Enum):
    TYPE_A = "A"
    TYPE_B = "B"


@dataclass(frozen=True)
class RingConfig:
    n_total: int
    m: Number
    c: Number
    radius: Number = 1

    def __post_init__(self):
        if int(self.n_total) != self.n_total or self.n_total < 2:
            raise ValueError(f"a ring needs n_total >= 2 masses, got {self.n_total!r}")
        if not float(self.m) > 0 or not float(self.c) > 0:
            raise ValueError("ring masses must be positive")
        if not float(self.radius) > 0:
            raise ValueError("ring radius must be positive")

    @property
    def sides(self) -> int:
        return self.n_total - 1

    def ray_angles(self, kind: RayKind) -> list[float]:
        q = self.sides
        offset = 0.0 if kind is RayKind.TYPE_A else 1.0
        return [(2 * k + offset) * math.pi / q for k in range(q)]

    def to_configuration(self) -> Configuration:
        rho = float(self.radius)
        pts = [MassPoint(0, 0, self.c)]
        if self.n_total == 2:
            pts.append(MassPoint(self.radius, 0, self.m))
        else:
            for k in range(self.sides):
                t = 2 * k * math.pi / self.sides
                pts.append(MassPoint(rho * math.cos(t), rho * math.sin(t), self.m))
        return Configuration(tuple(pts))


def make_ring(n_total: int, m: Number, c: Number, radius: Number = 1) -> Configuration:
    return RingConfig(n_total, m, c, radius).to_configuration()


def _peripheral_angles(ring: RingConfig, kind: RayKind) -> np.ndarray:
    """Peripheral mass angles after rotating the chosen ray onto the +x axis."""
    q = ring.sides
    offset = 0.0 if kind is RayKind.TYPE_A else 1.0
    return (2 * np.arange(q) + offset) * np.pi / q


def radial_force(ring: RingConfig, kind: RayKind, x):
    """
    F_x(x, 0) with the chosen ray rotated onto the positive x-axis.

    Written out in closed form from the ring geometry (not via the generic
    gradient), so the two can be cross-checked.
    """
    x = np.asarray(x, dtype=float)
    rho = float(ring.radius)
    if np.any(x <= 0):
        raise SingularEvaluationError("radial force is evaluated on the open ray x > 0")
    t = _peripheral_angles(ring, kind)
    cos_t, sin_t = np.cos(t), np.sin(t)
    dist2 = (x[..., None] - rho * cos_t) ** 2 + (rho * sin_t) ** 2
    if np.any(dist2 <= 0):
        raise SingularEvaluationError("radial force evaluated on a peripheral mass")
    pull = np.sum((x[..., None] - rho * cos_t) / dist2 ** 1.5, axis=-1)
    out = x - float(ring.c) / (x * x) - float(ring.m) * pull
    return float(out) if out.ndim == 0 else out


def radial_force_type_a(ring: RingConfig, x):
    return radial_force(ring, RayKind.TYPE_A, x)


def radial_force_type_b(ring: RingConfig, x):
    return radial_force(ring, RayKind.TYPE_B, x)


def _check_g_args(n_total: int, x) -> None:
    if n_total < 4:
        raise ValueError("g is defined for n_total >= 4 (at least three peripheral masses)")
    if np.any(np.asarray(x) < 0):
        raise ValueError("g is defined for x >= 0")


def g_func(n_total: int, x):
    """
    Peripheral pull along a type B ray for unit ring radius and unit mass:

        g(x) = sum_k (cos t_k - x) / (x^2 - 2 x cos t_k + 1)^(3/2),
        t_k = (2k+1) pi / (n-1)

    so that F_x(x, 0) = x - c/x^2 + m g(x).
    """
    _check_g_args(n_total, x)
    x = np.asarray(x, dtype=float)
    ct = np.cos((2 * np.arange(n_total - 1) + 1) * np.pi / (n_total - 1))
    d = x[..., None] ** 2 - 2 * x[..., None] * ct + 1
    out = np.sum((ct - x[..., None]) / d ** 1.5, axis=-1)
    return float(out) if out.ndim == 0 else out


def g_prime(n_total: int, x):
    """Derivative of `g_func` in x; g'(0) = (n_total - 1) / 2."""
    _check_g_args(n_total, x)
    x = np.asarray(x, dtype=float)
    ct = np.cos((2 * np.arange(n_total - 1) + 1) * np.pi / (n_total - 1))
    xx = x[..., None]
    d = xx ** 2 - 2 * xx * ct + 1
    terms = -3 * (2 * xx - 2 * ct) * (ct - xx) / (2 * d ** 2.5) - 1 / d ** 1.5
    out = np.sum(terms, axis=-1)
    return float(out) if out.ndim == 0 else out


def trig_lemma_sum(q: int) -> float:
    """sum_{k=0}^{q-1} cos(2(2k+1) pi / q), which vanishes for every q > 2."""
    if int(q) != q or q <= 2:
        raise ValueError(f"q must be an integer greater than 2, got {q!r}")
    k = np.arange(q)
    return float(math.fsum(np.cos(2 * (2 * k + 1) * np.pi / q)))


def _scan_roots(f, a: float, b: float, step: float, xtol: float) -> list[float]:
    """Bracket sign changes of f on [a, b] at the given step and bisect each."""
    xs = np.arange(a, b, step)
    if len(xs) == 0 or xs[-1] < b:
        xs = np.append(xs, b)
    vals = f(xs)
    roots = []
    s = np.sign(vals)
    for i in np.flatnonzero(s[:-1] * s[1:] < 0):
        roots.append(bisect(lambda t: float(f(np.array(t))), xs[i], xs[i + 1],
                            xtol=xtol, rtol=4 * np.finfo(float).eps))
    roots.extend(float(xs[i]) for i in np.flatnonzero(s == 0))
    return sorted(roots)


def ray_equilibria(ring: RingConfig, kind: RayKind,
                   step: float = SCAN_STEP, xtol: float = 1e-12) -> list[float]:
    """
    Radii of the equilibria on one representative ray of the given kind.

    The ray is scanned from 1e-6*radius out to the search-domain radius with
    step 1e-4*radius; for type A the scan is split at the peripheral mass so
    the pole there is not mistaken for a root.
    """
    rho = float(ring.radius)
    R = search_domain(ring.to_configuration()).outer_radius
    lo = SCAN_CUTOFF * rho
    gap = 1e-9 * rho
    f = lambda x: radial_force(ring, kind, x)  # noqa: E731

    if kind is RayKind.TYPE_A:
        pieces = [(lo, rho - gap), (rho + gap, R)]
    else:
        pieces = [(lo, R)]
    roots: list[float] = []
    for a, b in pieces:
        roots.extend(_scan_roots(f, a, b, step * rho, xtol))
    return roots


@dataclass(frozen=True)
class RingCensus:
    """Equilibria of a ring split by the ray family they sit on."""

    total: int
    ray_a: int
    ray_b: int
    off_ray: int
    ray_a_radii: tuple[float, ...]
    ray_b_radii: tuple[float, ...]
    consistent: bool
    equilibria: tuple[Equilibrium, ...]


def _on_ray(angle: float, ray_angles: Sequence[float], tol: float) -> bool:
    for t in ray_angles:
        d = math.remainder(angle - t, 2 * math.pi)
        if abs(d) <= tol:
            return True
    return False


def ring_census(ring: RingConfig, opts: Optional[SolveOptions] = None,
                angle_tol: float = ANGLE_TOL) -> RingCensus:
    """
    Solve the full ring, then sort the equilibria onto ray families and check
    the tally against the one-dimensional ray scans.
    """
    eqs = find_equilibria(ring.to_configuration(), opts)
    a_angles = ring.ray_angles(RayKind.TYPE_A)
    b_angles = ring.ray_angles(RayKind.TYPE_B)
    ray_a = ray_b = off = 0
    for eq in eqs:
        theta = math.atan2(eq.location.y, eq.location.x)
        if _on_ray(theta, a_angles, angle_tol):
            ray_a += 1
        elif _on_ray(theta, b_angles, angle_tol):
            ray_b += 1
        else:
            off += 1

    a_radii = tuple(ray_equilibria(ring, RayKind.TYPE_A))
    b_radii = tuple(ray_equilibria(ring, RayKind.TYPE_B))
    consistent = (
        len(a_radii) * len(a_angles) == ray_a
        and len(b_radii) * len(b_angles) == ray_b
        and ray_a + ray_b + off == len(eqs)
    )
    return RingCensus(
        total=len(eqs),
        ray_a=ray_a,
        ray_b=ray_b,
        off_ray=off,
        ray_a_radii=a_radii,
        ray_b_radii=b_radii,
        consistent=consistent,
        equilibria=tuple(eqs),
    )


def count_ring_equilibria(ring: RingConfig, opts: Optional[SolveOptions] = None) -> int:
    return ring_census(ring, opts).total


@dataclass(frozen=True)
class SweepRow:
    ratio: float
    count: Optional[int]
    ray_a_count: Optional[int]
    ray_b_count: Optional[int]
    off_ray_count: Optional[int]


@dataclass(frozen=True)
class SweepResult:
    n_total: int
    rows: tuple[SweepRow, ...]

    @property
    def first_full_ratio(self) -> Optional[float]:
        """Smallest swept ratio whose count reaches 5n - 5."""
        target = 5 * self.n_total - 5
        for row in self.rows:
            if row.count is not None and row.count >= target:
                return row.ratio
        return None

    def to_csv(self) -> str:
        lines = ["ratio,count,ray_a_count,ray_b_count,off_ray_count"]
        for r in self.rows:
            cells = [repr(float(r.ratio))] + ["" if v is None else str(v) for v in
                                             (r.count, r.ray_a_count, r.ray_b_count, r.off_ray_count)]
            lines.append(",".join(cells))
        return "\n".join(lines) + "\n"


def mass_sweep(n_total: int, mass_ratios: Sequence[Number], opts: Optional[SolveOptions] = None) -> SweepResult:
    """
    Equilibrium census of the unit-radius ring with central mass 1 and
    peripheral mass ``ratio`` for every ratio. Rows whose solve raises are
    kept with empty counts.
    """
    if n_total < 4:
        raise ValueError("mass sweeps are defined for n_total >= 4")
    ratios = list(mass_ratios)
    if any(not float(r) > 0 for r in ratios):
        raise ValueError("mass ratios must be positive")
    if any(float(b) <= float(a) for a, b in zip(ratios, ratios[1:])):
        raise ValueError("mass ratios must be strictly ascending")
    rows = []
    for ratio in ratios:
        try:
            census = ring_census(RingConfig(n_total, ratio, 1), opts)
        except (ArithmeticError, ValueError, RuntimeError):
            rows.append(SweepRow(float(ratio), None, None, None, None))
            continue
        rows.append(SweepRow(float(ratio), census.total, census.ray_a, census.ray_b, census.off_ray))
    return SweepResult(n_total, tuple(rows))
