import math
from fractions import Fraction

import numpy as np
import pytest

from eqlab.model import gradient_arrays
from eqlab.ring import (
    RayKind,
    RingConfig,
    SweepResult,
    SweepRow,
    g_func,
    g_prime,
    make_ring,
    mass_sweep,
    radial_force,
    ray_equilibria,
    ring_census,
    trig_lemma_sum,
)


def test_make_ring_layout():
    cfg = make_ring(4, 1, Fraction(1, 100))
    assert cfg.n == 4
    assert (cfg.points[0].x, cfg.points[0].y, cfg.points[0].m) == (0, 0, Fraction(1, 100))
    r = np.hypot(cfg.xs[1:], cfg.ys[1:])
    assert np.allclose(r, 1.0, atol=1e-15)
    ang = np.sort(np.mod(np.arctan2(cfg.ys[1:], cfg.xs[1:]), 2 * np.pi))
    assert np.allclose(ang, [0, 2 * np.pi / 3, 4 * np.pi / 3], atol=1e-15)


def test_ring_validation():
    with pytest.raises(ValueError):
        RingConfig(1, 1, 1)
    with pytest.raises(ValueError):
        RingConfig(4, 0, 1)
    with pytest.raises(ValueError):
        RingConfig(4, 1, -1)


def test_ray_angles():
    ring = RingConfig(5, 1, 1)
    assert ring.ray_angles(RayKind.TYPE_A) == pytest.approx([0, math.pi / 2, math.pi, 3 * math.pi / 2])
    assert ring.ray_angles(RayKind.TYPE_B) == pytest.approx([math.pi / 4, 3 * math.pi / 4,
                                                             5 * math.pi / 4, 7 * math.pi / 4])


@pytest.mark.parametrize("kind", list(RayKind))
def test_radial_force_matches_generic_gradient(kind):
    ring = RingConfig(6, Fraction(7, 6), Fraction(7, 60))
    cfg = ring.to_configuration()
    t = ring.ray_angles(kind)[0]
    xs = np.linspace(0.05, 2.5, 400)
    xs = xs[np.abs(xs - 1) > 1e-3]
    gx, gy = gradient_arrays(cfg, xs * math.cos(t), xs * math.sin(t))
    radial = gx * math.cos(t) + gy * math.sin(t)
    transverse = -gx * math.sin(t) + gy * math.cos(t)
    assert np.allclose(radial_force(ring, kind, xs), radial, rtol=1e-12, atol=1e-12)
    # reflection symmetry kills the transverse component
    assert np.max(np.abs(transverse)) < 1e-9 * np.max(np.abs(radial))


def test_g_is_the_type_b_pull():
    ring = RingConfig(7, 1, 1)
    xs = np.linspace(0.01, 3, 50)
    expected = xs - 1 / xs ** 2 + g_func(7, xs)
    assert np.allclose(radial_force(ring, RayKind.TYPE_B, xs), expected, rtol=1e-13)


def test_g_prime_matches_finite_difference():
    xs = np.linspace(0.0, 2.0, 41)[1:]
    h = 1e-6
    for n in (4, 7, 12):
        fd = (g_func(n, xs + h) - g_func(n, xs - h)) / (2 * h)
        assert np.allclose(g_prime(n, xs), fd, rtol=1e-6, atol=1e-6)


@pytest.mark.parametrize("n", range(4, 21))
def test_g_prime_at_zero(n):
    assert g_prime(n, 0.0) == pytest.approx((n - 1) / 2, abs=1e-10)


def test_g_domain_errors():
    with pytest.raises(ValueError):
        g_func(3, 0.5)
    with pytest.raises(ValueError):
        g_prime(5, -0.1)


def test_trig_lemma():
    for q in range(3, 201):
        assert abs(trig_lemma_sum(q)) <= 1e-12
    with pytest.raises(ValueError):
        trig_lemma_sum(2)


def test_ray_equilibria_are_roots():
    ring = RingConfig(4, 1, Fraction(1, 100))
    for kind in RayKind:
        roots = ray_equilibria(ring, kind)
        assert roots == sorted(roots)
        for r in roots:
            assert abs(radial_force(ring, kind, r)) < 1e-8


def test_small_ring_census():
    census = ring_census(RingConfig(4, 1, Fraction(1, 100)))
    assert (census.total, census.ray_a, census.ray_b, census.off_ray) == (15, 6, 9, 0)
    assert census.consistent
    assert len(census.ray_a_radii) == 2 and len(census.ray_b_radii) == 3


def test_two_body_ring_is_not_central():
    # the centre of mass is off the origin, so this is not the Lagrange set-up
    census = ring_census(RingConfig(2, 1, 1))
    assert census.total == 3


def test_mass_sweep_rows_and_csv():
    result = mass_sweep(4, [0.01, 1.0])
    assert [r.ratio for r in result.rows] == [0.01, 1.0]
    assert all(r.count == census_total(4, r.ratio) for r in result.rows)
    lines = result.to_csv().splitlines()
    assert lines[0] == "ratio,count,ray_a_count,ray_b_count,off_ray_count"
    assert len(lines) == 3


def census_total(n, ratio):
    return ring_census(RingConfig(n, ratio, 1)).total


def test_mass_sweep_validation():
    with pytest.raises(ValueError):
        mass_sweep(3, [1.0])
    with pytest.raises(ValueError):
        mass_sweep(4, [1.0, 0.5])
    with pytest.raises(ValueError):
        mass_sweep(4, [0.0, 1.0])


def test_first_full_ratio():
    rows = (SweepRow(0.1, 9, 6, 3, 0), SweepRow(1.0, None, None, None, None),
            SweepRow(10.0, 15, 6, 9, 0), SweepRow(100.0, 15, 6, 9, 0))
    assert SweepResult(4, rows).first_full_ratio == 10.0
    assert SweepResult(4, rows[:2]).first_full_ratio is None
    assert SweepResult(4, rows).to_csv().splitlines()[2] == "1.0,,,,"
