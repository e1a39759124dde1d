"""
Global multistart Newton search for the equilibria of the effective potential.

Pipeline: search domain -> seed lattice -> damped Newton from every seed ->
deduplicate -> classify by Morse index -> canonical sort. Newton runs are
vectorised over seed batches; batches may be farmed out to threads, and the
result does not depend on how the seeds were split.
"""

from __future__ import annotations

import logging
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .model import (
    SINGULAR_CUTOFF,
    Configuration,
    SearchDomain,
    SymMat2,
    Vec2,
    derivatives_arrays,
    gradient_arrays,
    search_domain,
)

log = logging.getLogger(__name__)

CAPTURE_RING_POINTS = 32
MAX_HALVINGS = 20
# A run whose accepted step is cut below 2**-STALL_HALVINGS on STALL_ITERS
# consecutive iterations is crawling along a near-degenerate valley and is
# abandoned; seeds closer to the root it is creeping toward will find it.
STALL_HALVINGS = 10
STALL_ITERS = 8
BATCH_SIZE = 65536


class SeedCapacityError(RuntimeError):
    pass


class DegenerateHessianError(ValueError):
    pass


def _env_threads() -> int:
    raw = os.environ.get("EQLAB_THREADS", "0")
    try:
        n = int(raw)
    except ValueError:
        log.warning("ignoring non-integer EQLAB_THREADS=%r", raw)
        n = 0
    return n if n > 0 else (os.cpu_count() or 1)


@dataclass
class SolveOptions:
    """
    Solver knobs. ``None`` means "derive from the configuration".

    Lengths (spacing, tolerances, dedup radius) are absolute; the derived
    defaults are multiples of the configuration scale max(1, max|z_i|).
    """

    grid_spacing: Optional[float] = None
    newton_tolerance: Optional[float] = None
    max_newton_iters: int = 100
    dedup_radius: Optional[float] = None
    degeneracy_threshold: float = 1e-8
    residual_tolerance: Optional[float] = None
    seed_limit: int = 10**7
    # above this many lattice seeds the default grid switches to a coarse
    # global lattice plus fine patches around each mass
    dense_seed_budget: int = 400_000
    threads: int = field(default_factory=_env_threads)

    def __post_init__(self):
        for name in ("grid_spacing", "newton_tolerance", "dedup_radius", "residual_tolerance"):
            v = getattr(self, name)
            if v is not None and not v > 0:
                raise ValueError(f"{name} must be positive, got {v!r}")
        if not self.degeneracy_threshold > 0:
            raise ValueError("degeneracy_threshold must be positive")
        if self.max_newton_iters < 1:
            raise ValueError("max_newton_iters must be at least 1")


@dataclass(frozen=True)
class Equilibrium:
    location: Vec2
    residual: float
    hessian: SymMat2
    morse_index: Optional[int]  # None when the Hessian is degenerate
    hessian_det: float
    min_mass_distance: float

    @property
    def degenerate(self) -> bool:
        return self.morse_index is None

    def to_dict(self) -> dict:
        return {
            "x": self.location.x,
            "y": self.location.y,
            "residual": self.residual,
            "morse_index": self.morse_index,
            "hessian_det": self.hessian_det,
        }


@dataclass(frozen=True)
class MorseReport:
    n: int
    counts: tuple[int, int, int]
    total: int
    betti: tuple[int, int]
    lower_bound_ok: bool
    euler_ok: bool
    weak_morse_ok: bool
    degenerate_found: bool
    n_degenerate: int = 0

    @property
    def euler_sum(self) -> int:
        n0, n1, n2 = self.counts
        return n0 - n1 + n2

    def to_dict(self) -> dict:
        n0, n1, n2 = self.counts
        return {
            "N0": n0,
            "N1": n1,
            "N2": n2,
            "N": self.total,
            "lower_bound_ok": self.lower_bound_ok,
            "euler_ok": self.euler_ok,
            "weak_morse_ok": self.weak_morse_ok,
            "degenerate_found": self.degenerate_found,
            "n_degenerate": self.n_degenerate,
        }


# -- seeding --------------------------------------------------------------------

def _lattice_in_disc(cx: float, cy: float, radius: float, spacing: float) -> np.ndarray:
    """Points of the origin-anchored lattice spacing*Z^2 strictly inside a disc."""
    ix = np.arange(math.ceil((cx - radius) / spacing), math.floor((cx + radius) / spacing) + 1)
    iy = np.arange(math.ceil((cy - radius) / spacing), math.floor((cy + radius) / spacing) + 1)
    X, Y = np.meshgrid(ix * spacing, iy * spacing)
    pts = np.column_stack([X.ravel(), Y.ravel()])
    keep = np.hypot(pts[:, 0] - cx, pts[:, 1] - cy) < radius
    return pts[keep]


def _outside_punctures(pts: np.ndarray, domain: SearchDomain) -> np.ndarray:
    keep = np.hypot(pts[:, 0], pts[:, 1]) < domain.outer_radius
    for c in domain.centers:
        keep &= np.hypot(pts[:, 0] - c.x, pts[:, 1] - c.y) > domain.puncture_radius
    return pts[keep]


def _capture_rings(domain: SearchDomain) -> np.ndarray:
    if not domain.centers:
        return np.empty((0, 2))
    t = 2.0 * np.pi * np.arange(CAPTURE_RING_POINTS) / CAPTURE_RING_POINTS
    r = 2.0 * domain.puncture_radius
    rings = [np.column_stack([c.x + r * np.cos(t), c.y + r * np.sin(t)]) for c in domain.centers]
    return _outside_punctures(np.vstack(rings), domain)


def seed_grid(domain: SearchDomain, spacing: float, limit: int = 10**7) -> np.ndarray:
    """
    Lattice seeds inside the punctured disc plus a capture ring of 32 points
    at radius 2*eps around every mass. Returns an (N, 2) array.
    """
    if not spacing > 0:
        raise ValueError(f"spacing must be positive, got {spacing!r}")
    estimate = math.pi * (domain.outer_radius / spacing + 1.0) ** 2
    if estimate > limit:
        raise SeedCapacityError(
            f"about {estimate:.3g} seeds at spacing {spacing:.3g} exceeds the limit {limit}"
        )
    pts = _lattice_in_disc(0.0, 0.0, domain.outer_radius, spacing)
    pts = _outside_punctures(pts, domain)
    return np.vstack([pts, _capture_rings(domain)])


def _default_seeds(config: Configuration, domain: SearchDomain, opts: SolveOptions) -> np.ndarray:
    R, eps = domain.outer_radius, domain.puncture_radius
    d_min = config.min_distance() if config.n > 1 else R
    if opts.grid_spacing is not None:
        return seed_grid(domain, opts.grid_spacing, opts.seed_limit)
    fine = min(eps, d_min / 8.0, R / 100.0)
    if math.pi * (R / fine) ** 2 <= opts.dense_seed_budget:
        return seed_grid(domain, fine, opts.seed_limit)
    # Coarse lattice everywhere, the fine lattice only near the masses where
    # the small-scale structure lives.
    coarse = max(min(d_min / 8.0, R / 100.0), R * math.sqrt(math.pi / opts.dense_seed_budget))
    patch_radius = 0.5 * d_min
    patches = [_lattice_in_disc(c.x, c.y, patch_radius, fine) for c in domain.centers]
    pts = np.vstack([seed_grid(domain, coarse, opts.seed_limit)] + patches)
    log.debug("two-level seeding: coarse %.3g, fine %.3g, %d seeds", coarse, fine, len(pts))
    return _outside_punctures(pts, domain)


# -- Newton -------------------------------------------------------------------

def _newton_step(gx, gy, hxx, hxy, hyy):
    det = hxx * hyy - hxy * hxy
    tiny = 1e-300 + 1e-15 * (hxx * hxx + hyy * hyy + 2 * hxy * hxy)
    ok = np.abs(det) > tiny
    safe = np.where(ok, det, 1.0)
    sx = np.where(ok, -(hyy * gx - hxy * gy) / safe, -gx)
    sy = np.where(ok, -(hxx * gy - hxy * gx) / safe, -gy)
    return sx, sy


def _in_domain(config: Configuration, domain: SearchDomain, X, Y, cutoff: float) -> np.ndarray:
    ok = np.isfinite(X) & np.isfinite(Y) & (np.hypot(X, Y) < domain.outer_radius)
    d = np.hypot(X[:, None] - config.xs, Y[:, None] - config.ys)
    return ok & (np.min(d, axis=1) > cutoff)


def _newton_batch(config: Configuration, seeds: np.ndarray, domain: SearchDomain,
                  tol: float, accept_tol: float, max_iter: int):
    """
    Damped Newton on grad F = 0 for a batch of seeds.

    Returns (points, residuals, converged). A run converges when the residual
    drops to ``tol``, or when no halved step reduces it further while it is
    already within ``accept_tol`` and the Newton correction is below
    1e-8 * scale (the floating-point floor).
    """
    step_tol = 1e-8 * config.scale
    cutoff = SINGULAR_CUTOFF * config.scale
    X = seeds[:, 0].astype(float).copy()
    Y = seeds[:, 1].astype(float).copy()
    n = len(X)
    res = np.full(n, np.inf)
    converged = np.zeros(n, dtype=bool)
    stalls = np.zeros(n, dtype=np.int64)
    active = _in_domain(config, domain, X, Y, cutoff)

    for _ in range(max_iter + 1):
        idx = np.flatnonzero(active)
        if idx.size == 0:
            break
        gx, gy, hxx, hxy, hyy = derivatives_arrays(config, X[idx], Y[idx])
        r = np.hypot(gx, gy)
        res[idx] = r
        done = r <= tol
        converged[idx[done]] = True
        active[idx[done]] = False
        keep = ~done
        idx, gx, gy, hxx, hxy, hyy, r = (a[keep] for a in (idx, gx, gy, hxx, hxy, hyy, r))
        if idx.size == 0:
            break

        sx, sy = _newton_step(gx, gy, hxx, hxy, hyy)
        scale = np.ones(idx.size)
        pending = np.arange(idx.size)
        new_r = np.full(idx.size, np.inf)
        for _h in range(MAX_HALVINGS + 1):
            tx = X[idx[pending]] + scale[pending] * sx[pending]
            ty = Y[idx[pending]] + scale[pending] * sy[pending]
            inside = _in_domain(config, domain, tx, ty, cutoff)
            tgx, tgy = gradient_arrays(config, tx, ty)
            tr = np.where(inside, np.hypot(tgx, tgy), np.inf)
            tr = np.where(np.isfinite(tr), tr, np.inf)
            new_r[pending] = tr
            better = tr < r[pending]
            pending = pending[~better]
            if pending.size == 0:
                break
            scale[pending] *= 0.5

        moved = np.isfinite(new_r) & (new_r < r)
        i_moved = idx[moved]
        X[i_moved] += scale[moved] * sx[moved]
        Y[i_moved] += scale[moved] * sy[moved]
        res[i_moved] = new_r[moved]
        crawling = scale[moved] < 2.0 ** -STALL_HALVINGS
        stalls[i_moved] = np.where(crawling, stalls[i_moved] + 1, 0)

        # No halving helps: accept only at the rounding floor, i.e. when both
        # the residual and the Newton correction are already negligible.
        stuck = idx[~moved]
        floor_ok = (r[~moved] <= accept_tol) & (np.hypot(sx[~moved], sy[~moved]) <= step_tol)
        converged[stuck[floor_ok]] = True
        active[stuck] = False
        active[i_moved[stalls[i_moved] >= STALL_ITERS]] = False

    return np.column_stack([X, Y]), res, converged


def newton_refine(config: Configuration, seed: Vec2, opts: Optional[SolveOptions] = None,
                  domain: Optional[SearchDomain] = None) -> Optional["Equilibrium"]:
    """Damped Newton from a single seed; ``None`` if it fails to converge."""
    opts = opts or SolveOptions()
    domain = domain or search_domain(config)
    tol, accept_tol, _ = _tolerances(config, opts)
    pts, res, conv = _newton_batch(
        config, np.array([[seed[0], seed[1]]], dtype=float), domain, tol, accept_tol,
        opts.max_newton_iters,
    )
    if not conv[0]:
        return None
    return _make_equilibrium(config, pts[0, 0], pts[0, 1], opts.degeneracy_threshold)


# -- classification -----------------------------------------------------------

def classify(h: SymMat2, threshold: float = 1e-8) -> int:
    """Number of negative Hessian eigenvalues, from the signs of det and trace."""
    det = h.det
    if not abs(det) > threshold:
        raise DegenerateHessianError(f"|det H| = {abs(det):.3g} <= {threshold:.3g}")
    if det < 0:
        return 1
    return 0 if h.trace > 0 else 2


def _make_equilibrium(config: Configuration, x: float, y: float, threshold: float) -> Equilibrium:
    gx, gy, hxx, hxy, hyy = derivatives_arrays(config, x, y)
    h = SymMat2(float(hxx), float(hxy), float(hyy))
    try:
        index = classify(h, threshold)
    except DegenerateHessianError:
        index = None
    dmin = float(np.min(np.hypot(x - config.xs, y - config.ys)))
    return Equilibrium(
        location=Vec2(float(x), float(y)),
        residual=float(math.hypot(gx, gy)),
        hessian=h,
        morse_index=index,
        hessian_det=h.det,
        min_mass_distance=dmin,
    )


def _tolerances(config: Configuration, opts: SolveOptions):
    s = config.scale
    tol = opts.newton_tolerance if opts.newton_tolerance is not None else 1e-12 * s
    accept = opts.residual_tolerance if opts.residual_tolerance is not None else 1e-10 * s
    dedup = opts.dedup_radius if opts.dedup_radius is not None else 1e-6 * s
    return tol, max(accept, tol), dedup


def _deduplicate(pts: np.ndarray, res: np.ndarray, radius: float) -> np.ndarray:
    """
    Indices of cluster representatives: candidates within ``radius`` of an
    already kept point are merged into it. Candidates are visited by
    increasing residual, ties broken by (x, y), so the result does not depend
    on input order.
    """
    if len(pts) == 0:
        return np.empty(0, dtype=int)
    order = np.lexsort((pts[:, 1], pts[:, 0], res))
    # Collapse numerically identical convergences first; keeps the greedy pass short.
    fine = np.floor(pts[order] / (0.25 * radius)).astype(np.int64)
    _, first = np.unique(fine, axis=0, return_index=True)
    order = order[np.sort(first)]

    cells: dict[tuple[int, int], list[int]] = {}
    kept: list[int] = []
    for i in order:
        px, py = pts[i]
        cx, cy = int(math.floor(px / radius)), int(math.floor(py / radius))
        clash = False
        for ox in (-1, 0, 1):
            for oy in (-1, 0, 1):
                for j in cells.get((cx + ox, cy + oy), ()):
                    if math.hypot(px - pts[j, 0], py - pts[j, 1]) <= radius:
                        clash = True
                        break
                if clash:
                    break
            if clash:
                break
        if not clash:
            kept.append(int(i))
            cells.setdefault((cx, cy), []).append(int(i))
    return np.array(kept, dtype=int)


def find_equilibria(config: Configuration, opts: Optional[SolveOptions] = None) -> list[Equilibrium]:
    """
    All isolated equilibria found from the seed lattice, canonically sorted.

    Degenerate survivors (|det H| below the threshold) are kept with
    ``morse_index=None``; `morse_report` flags them.
    """
    opts = opts or SolveOptions()
    domain = search_domain(config)
    tol, accept_tol, dedup = _tolerances(config, opts)
    seeds = _default_seeds(config, domain, opts)
    batches = [seeds[i:i + BATCH_SIZE] for i in range(0, len(seeds), BATCH_SIZE)]

    def run(batch):
        return _newton_batch(config, batch, domain, tol, accept_tol, opts.max_newton_iters)

    if opts.threads > 1 and len(batches) > 1:
        with ThreadPoolExecutor(max_workers=opts.threads) as pool:
            results = list(pool.map(run, batches))
    else:
        results = [run(b) for b in batches]

    pts = np.vstack([r[0][r[2]] for r in results]) if results else np.empty((0, 2))
    res = np.concatenate([r[1][r[2]] for r in results]) if results else np.empty(0)
    log.debug("%d seeds, %d converged", len(seeds), len(pts))

    keep = _deduplicate(pts, res, dedup)
    out = []
    for i in keep:
        eq = _make_equilibrium(config, pts[i, 0], pts[i, 1], opts.degeneracy_threshold)
        if eq.residual <= accept_tol:
            out.append(eq)
    out.sort(key=lambda e: (round(e.location.x / dedup), round(e.location.y / dedup),
                            e.location.x, e.location.y))
    return out


def morse_report(equilibria: Sequence[Equilibrium], n: int) -> MorseReport:
    counts = [0, 0, 0]
    degenerate = 0
    for eq in equilibria:
        if eq.morse_index is None:
            degenerate += 1
        else:
            counts[eq.morse_index] += 1
    n0, n1, n2 = counts
    total = n0 + n1 + n2
    return MorseReport(
        n=n,
        counts=(n0, n1, n2),
        total=total,
        betti=(1, n),
        lower_bound_ok=total >= n + 1,
        euler_ok=n0 - n1 + n2 == 1 - n,
        weak_morse_ok=n0 >= 1 and n1 >= n,
        degenerate_found=degenerate > 0,
        n_degenerate=degenerate,
    )


def solve(config: Configuration, opts: Optional[SolveOptions] = None):
    """find_equilibria followed by morse_report."""
    eqs = find_equilibria(config, opts)
    return eqs, morse_report(eqs, config.n)
