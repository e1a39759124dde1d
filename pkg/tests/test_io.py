import json
from fractions import Fraction

import numpy as np
import pytest

from eqlab.io import (
    ConfigError,
    config_to_dict,
    contour_grid,
    parse_config,
    parse_contour_csv,
    result_to_dict,
)
from eqlab.model import Configuration
from eqlab.solver import solve


def test_parse_config_keeps_decimals_exact():
    cfg = parse_config('{"masses": [{"x": 0.1, "y": "1/3", "m": 2}]}')
    p = cfg.points[0]
    assert (p.x, p.y, p.m) == (Fraction(1, 10), Fraction(1, 3), 2)


@pytest.mark.parametrize("text, field", [
    ("[1, 2]", "top level"),
    ('{"mass": []}', "masses"),
    ('{"masses": []}', "masses"),
    ('{"masses": [{"x": 0, "y": 0}]}', "masses[0].m"),
    ('{"masses": [{"x": 0, "y": 0, "m": 1}, {"x": 1, "y": 0, "m": -1}]}', "masses[1].m"),
    ('{"masses": [{"x": "a", "y": 0, "m": 1}]}', "masses[0].x"),
    ('{"masses": [{"x": true, "y": 0, "m": 1}]}', "masses[0].x"),
    ('{"masses": [{"x": 0, "y": 0, "m": 1}, {"x": 0, "y": 0, "m": 1}]}', "masses"),
    ("{not json", "invalid JSON"),
])
def test_config_errors_name_the_field(text, field):
    with pytest.raises(ConfigError, match=field.replace("[", r"\[").replace("]", r"\]")):
        parse_config(text)


def test_config_round_trip():
    cfg = Configuration.from_triples([(Fraction(1, 3), 0.25, 2), (-1, 1, Fraction(7, 60))])
    again = parse_config(json.dumps(config_to_dict(cfg)))
    assert [(p.x, p.y, p.m) for p in again.points] == [(p.x, p.y, p.m) for p in cfg.points]


def test_result_document_shape():
    cfg = Configuration.from_triples([(1, 1, 1), (2, 2, 1)])
    eqs, rep = solve(cfg)
    doc = result_to_dict(cfg, eqs, rep)
    assert doc["n"] == 2
    assert set(doc["equilibria"][0]) == {"x", "y", "residual", "morse_index", "hessian_det"}
    assert {"N0", "N1", "N2", "lower_bound_ok", "euler_ok", "degenerate_found"} <= set(doc["report"])
    # a result document is itself a valid configuration
    assert parse_config(json.dumps(doc)).n == 2


def test_contour_single_mass_symmetry_and_cap():
    cfg = Configuration.from_triples([(0, 0, 1)])
    grid = contour_grid(cfg, -2, 2, -2, 2, 41, cap=50)
    v = grid.values
    assert np.max(np.abs(v - v[:, ::-1])) <= 1e-12
    assert v[20, 20] == 50
    assert np.all(v <= 50)
    back = parse_contour_csv(grid.to_csv())
    assert np.array_equal(back.values, v)
    assert np.array_equal(back.xs, grid.xs)


def test_contour_validation():
    cfg = Configuration.from_triples([(0, 0, 1)])
    with pytest.raises(ValueError):
        contour_grid(cfg, 1, -1, -1, 1, 10)
    with pytest.raises(ValueError):
        contour_grid(cfg, -1, 1, -1, 1, 1)
    with pytest.raises(ValueError):
        contour_grid(cfg, -1, 1, -1, 1, 10, cap=0)
