"""Equilibria of the planar potential |z|^2/2 + sum_i m_i / |z - z_i|."""

from .families import CollinearConfig, collinear_config, collinear_roots, lagrange_config, triangle_config
from .model import Configuration, MassPoint, SearchDomain, SymMat2, Vec2, gradient, hessian, potential, search_domain
from .polysys import (
    PolynomialSystem,
    bezout_bound,
    build_system,
    conjectured_bound,
    lift_and_residual,
    mv_formula,
    mv_tilde_formula,
    reference_degrees,
)
from .ring import RayKind, RingConfig, g_func, g_prime, make_ring, mass_sweep, ring_census, trig_lemma_sum
from .solver import Equilibrium, MorseReport, SolveOptions, find_equilibria, morse_report, solve

__all__ = [
    "CollinearConfig", "collinear_config", "collinear_roots", "lagrange_config", "triangle_config",
    "Configuration", "MassPoint", "SearchDomain", "SymMat2", "Vec2",
    "gradient", "hessian", "potential", "search_domain",
    "PolynomialSystem", "bezout_bound", "build_system", "conjectured_bound", "lift_and_residual",
    "mv_formula", "mv_tilde_formula", "reference_degrees",
    "RayKind", "RingConfig", "g_func", "g_prime", "make_ring", "mass_sweep", "ring_census", "trig_lemma_sum",
    "Equilibrium", "MorseReport", "SolveOptions", "find_equilibria", "morse_report", "solve",
]
