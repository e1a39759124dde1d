import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from eqlab.families import lagrange_config
from eqlab.model import Configuration, SymMat2, Vec2, gradient, search_domain
from eqlab.solver import (
    DegenerateHessianError,
    SeedCapacityError,
    SolveOptions,
    _deduplicate,
    _env_threads,
    classify,
    find_equilibria,
    morse_report,
    newton_refine,
    seed_grid,
    solve,
)

from oracles import random_configuration


def locations(eqs):
    return np.array([[e.location.x, e.location.y] for e in eqs])


def same_point_sets(a, b, tol):
    if len(a) != len(b):
        return False
    d = np.hypot(a[:, None, 0] - b[:, 0], a[:, None, 1] - b[:, 1])
    return bool(np.all(d.min(axis=1) <= tol) and np.all(d.min(axis=0) <= tol))


@pytest.mark.parametrize("h, index", [
    (SymMat2(2, 0, 3), 0),
    (SymMat2(-2, 0, 3), 1),
    (SymMat2(1, 2, 1), 1),
    (SymMat2(-2, 0.5, -3), 2),
])
def test_classify(h, index):
    assert classify(h) == index


def test_classify_degenerate():
    with pytest.raises(DegenerateHessianError):
        classify(SymMat2(1, 1, 1))
    with pytest.raises(DegenerateHessianError):
        classify(SymMat2(1e-5, 0, 1e-5), threshold=1e-8)


def test_seed_grid_stays_in_domain():
    cfg = Configuration.from_triples([(0.5, 0, 1), (-0.5, 0.2, 2)])
    dom = search_domain(cfg)
    seeds = seed_grid(dom, 0.05)
    r = np.hypot(seeds[:, 0], seeds[:, 1])
    assert np.all(r < dom.outer_radius)
    for c in dom.centers:
        assert np.all(np.hypot(seeds[:, 0] - c.x, seeds[:, 1] - c.y) > dom.puncture_radius)
    # capture rings are present: 32 points at 2 eps around each mass
    d0 = np.hypot(seeds[:, 0] - 0.5, seeds[:, 1])
    assert np.sum(np.isclose(d0, 2 * dom.puncture_radius)) == 32


def test_seed_grid_capacity_and_spacing_errors():
    dom = search_domain(Configuration.from_triples([(0, 0, 1)]))
    with pytest.raises(SeedCapacityError):
        seed_grid(dom, 1e-5, limit=1000)
    with pytest.raises(ValueError):
        seed_grid(dom, 0.0)


def test_options_validation():
    with pytest.raises(ValueError):
        SolveOptions(grid_spacing=-1.0)
    with pytest.raises(ValueError):
        SolveOptions(max_newton_iters=0)


def test_env_threads(monkeypatch):
    monkeypatch.setenv("EQLAB_THREADS", "3")
    assert _env_threads() == 3
    monkeypatch.setenv("EQLAB_THREADS", "0")
    assert _env_threads() >= 1


def test_dedup_is_order_independent():
    rng = np.random.default_rng(5)
    centres = rng.uniform(-1, 1, size=(6, 2))
    pts = np.repeat(centres, 20, axis=0) + rng.normal(scale=1e-8, size=(120, 2))
    res = rng.uniform(0, 1e-12, size=120)
    keep = _deduplicate(pts, res, 1e-6)
    assert len(keep) == 6
    perm = rng.permutation(120)
    keep_p = _deduplicate(pts[perm], res[perm], 1e-6)
    assert sorted(map(tuple, pts[keep])) == sorted(map(tuple, pts[perm][keep_p]))


def test_newton_refine_from_nearby_seed():
    cfg = lagrange_config(1, 1)
    eq = newton_refine(cfg, Vec2(0.05, 0.85))
    assert eq is not None
    assert eq.residual <= 1e-12
    # L4 of equal masses sits on the y-axis at height sqrt(3)/2 * separation
    d = 2 ** (1 / 3)
    assert eq.location.x == pytest.approx(0.0, abs=1e-12)
    assert eq.location.y == pytest.approx(math.sqrt(3) / 2 * d, rel=1e-12)
    # F is positive definite here: L4 is a minimum
    assert eq.morse_index == 0


def test_equal_lagrange_masses():
    eqs, rep = solve(lagrange_config(1, 1))
    assert rep.counts == (2, 3, 0)
    on_axis = [e for e in eqs if abs(e.location.y) < 1e-12]
    assert len(on_axis) == 3
    for e in eqs:
        assert e.residual <= 1e-10
        g = gradient(lagrange_config(1, 1), e.location)
        assert math.hypot(*g) <= 1e-10


def test_single_mass_is_degenerate():
    eqs, rep = solve(Configuration.from_triples([(0, 0, 1)]))
    assert rep.degenerate_found
    assert all(e.morse_index is None for e in eqs)
    assert rep.total == 0 and rep.n_degenerate == len(eqs) > 0


def test_morse_report_flags():
    eqs, _ = solve(Configuration.from_triples([(1, 1, 1), (2, 2, 1)]))
    rep = morse_report(eqs, 2)
    assert rep.counts == (1, 2, 0)
    assert rep.lower_bound_ok and rep.euler_ok and rep.weak_morse_ok
    assert not rep.degenerate_found
    assert rep.to_dict()["N"] == 3
    assert rep.betti == (1, 2)


def test_explicit_spacing_gives_same_answer():
    cfg = Configuration.from_triples([(0.6, 0.1, 1), (-0.4, -0.5, 1.5)])
    a = locations(find_equilibria(cfg))
    b = locations(find_equilibria(cfg, SolveOptions(grid_spacing=0.01)))
    assert same_point_sets(a, b, 1e-9)


def test_threads_do_not_change_the_result():
    cfg = Configuration.from_triples([(0.6, 0.1, 1), (-0.4, -0.5, 1.5), (0.0, 0.7, 0.7)])
    a = locations(find_equilibria(cfg, SolveOptions(threads=1)))
    b = locations(find_equilibria(cfg, SolveOptions(threads=4)))
    assert np.array_equal(a, b)


@settings(max_examples=8, deadline=None)
@given(st.integers(0, 10_000), st.floats(0.2, 5.0))
def test_scale_invariance(seed, lam):
    rng = np.random.default_rng(seed)
    trip = random_configuration(rng, 2)
    cfg = Configuration.from_triples(trip)
    s = lam ** (1 / 3)
    scaled = Configuration.from_triples([(s * x, s * y, lam * m) for x, y, m in trip])
    a = locations(find_equilibria(cfg)) * s
    b = locations(find_equilibria(scaled))
    assert same_point_sets(a, b, 1e-7 * max(1.0, s))


@settings(max_examples=8, deadline=None)
@given(st.integers(0, 10_000), st.floats(0, 2 * math.pi))
def test_rotation_equivariance_of_equilibria(seed, theta):
    rng = np.random.default_rng(seed)
    cfg = Configuration.from_triples(random_configuration(rng, 2))
    a = locations(find_equilibria(cfg))
    c, s = math.cos(theta), math.sin(theta)
    a = a @ np.array([[c, s], [-s, c]])
    b = locations(find_equilibria(cfg.rotated(theta)))
    assert same_point_sets(a, b, 1e-8)
