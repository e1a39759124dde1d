"""
Polynomial reformulations of the equilibrium equations, with exact
rational coefficients, and the counting bounds attached to them.

Two systems are built from a configuration:

``w`` system, variables (x, y, w_1..w_n), n + 2 quartic equations::

    x - sum_i m_i (x - x_i) w_i^3 = 0
    y - sum_i m_i (y - y_i) w_i^3 = 0
    w_i^2 ((x - x_i)^2 + (y - y_i)^2) - 1 = 0

``ab`` system, variables (a_1..a_n, b_1..b_n, w_1..w_n), 3n equations,
where a_i = x - x_i and b_i = y - y_i are carried as separate unknowns.

Mixed volumes and Groebner degrees are not computed here; published values
are stored as reference data and the closed-form sequences are evaluated
exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from decimal import Decimal
from fractions import Fraction
from typing import Mapping, Optional, Sequence, Union

from .model import Configuration
from .solver import Equilibrium

Exponents = tuple[int, ...]


def to_fraction(v: Union[int, float, str, Fraction, Decimal]) -> Fraction:
    """
    Exact rational value of a configuration parameter.

    Floats are read through their shortest decimal repr, so 0.1 becomes
    1/10 rather than the nearest binary fraction. Strings may be decimals or
    "p/q".
    """
    if isinstance(v, Fraction):
        return v
    if isinstance(v, bool):
        raise TypeError("booleans are not numbers here")
    if isinstance(v, (int, Decimal)):
        return Fraction(v)
    if isinstance(v, float):
        if not math.isfinite(v):
            raise ValueError(f"non-finite value {v!r}")
        return Fraction(repr(v))
    if isinstance(v, str):
        return Fraction(v.strip())
    raise TypeError(f"cannot convert {type(v).__name__} to an exact rational")


@dataclass(frozen=True)
class Monomial:
    coefficient: Fraction
    exponents: Exponents

    @property
    def degree(self) -> int:
        return sum(self.exponents)


class Polynomial:
    """Sparse polynomial over Q in a fixed number of variables."""

    __slots__ = ("nvars", "terms")

    def __init__(self, nvars: int, terms: Optional[Mapping[Exponents, Fraction]] = None):
        self.nvars = nvars
        clean: dict[Exponents, Fraction] = {}
        for exps, c in (terms or {}).items():
            if len(exps) != nvars:
                raise ValueError(f"exponent vector {exps} does not match {nvars} variables")
            if any(e < 0 for e in exps):
                raise ValueError(f"negative exponent in {exps}")
            c = Fraction(c)
            if c:
                clean[tuple(exps)] = clean.get(tuple(exps), Fraction(0)) + c
        self.terms = {k: v for k, v in clean.items() if v}

    @classmethod
    def constant(cls, nvars: int, c) -> "Polynomial":
        return cls(nvars, {(0,) * nvars: to_fraction(c)})

    @classmethod
    def variable(cls, nvars: int, i: int) -> "Polynomial":
        exps = [0] * nvars
        exps[i] = 1
        return cls(nvars, {tuple(exps): Fraction(1)})

    def _coerce(self, other) -> "Polynomial":
        if isinstance(other, Polynomial):
            if other.nvars != self.nvars:
                raise ValueError("polynomials live in different rings")
            return other
        return Polynomial.constant(self.nvars, other)

    def __add__(self, other):
        other = self._coerce(other)
        out = dict(self.terms)
        for k, v in other.terms.items():
            out[k] = out.get(k, Fraction(0)) + v
        return Polynomial(self.nvars, out)

    __radd__ = __add__

    def __neg__(self):
        return Polynomial(self.nvars, {k: -v for k, v in self.terms.items()})

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        other = self._coerce(other)
        out: dict[Exponents, Fraction] = {}
        for ka, va in self.terms.items():
            for kb, vb in other.terms.items():
                k = tuple(a + b for a, b in zip(ka, kb))
                out[k] = out.get(k, Fraction(0)) + va * vb
        return Polynomial(self.nvars, out)

    __rmul__ = __mul__

    def __pow__(self, e: int):
        if e < 0:
            raise ValueError("negative powers are not polynomials")
        out = Polynomial.constant(self.nvars, 1)
        base = self
        while e:
            if e & 1:
                out = out * base
            base = base * base
            e >>= 1
        return out

    def __eq__(self, other):
        if not isinstance(other, Polynomial):
            return NotImplemented
        return self.nvars == other.nvars and self.terms == other.terms

    def __hash__(self):
        return hash((self.nvars, frozenset(self.terms.items())))

    def __repr__(self):
        return f"Polynomial({self.nvars}, {self.terms!r})"

    def is_zero(self) -> bool:
        return not self.terms

    @property
    def total_degree(self) -> int:
        return max((sum(k) for k in self.terms), default=0)

    def support(self) -> frozenset[Exponents]:
        return frozenset(self.terms)

    def monomials(self) -> list[Monomial]:
        """Terms ordered by descending total degree, then descending exponents."""
        keys = sorted(self.terms, key=lambda k: (-sum(k), tuple(-e for e in k)))
        return [Monomial(self.terms[k], k) for k in keys]

    def evaluate(self, values: Sequence):
        """
        Value at ``values``. Works for any ring the coefficients multiply
        into: Fractions give exact results, floats give floats, and
        Polynomials give a substituted polynomial.
        """
        if len(values) != self.nvars:
            raise ValueError(f"expected {self.nvars} values, got {len(values)}")
        total = 0
        for exps, c in self.terms.items():
            term = c
            for v, e in zip(values, exps):
                if e:
                    term = term * v ** e
            total = total + term
        return total

    def format(self, names: Sequence[str]) -> str:
        parts = []
        for mono in self.monomials():
            factors = []
            for name, e in zip(names, mono.exponents):
                if e == 1:
                    factors.append(name)
                elif e > 1:
                    factors.append(f"{name}^{e}")
            c = mono.coefficient
            mag = abs(c)
            body = "*".join(factors)
            if not body:
                text = str(mag)
            elif mag == 1:
                text = body
            else:
                text = f"{mag}*{body}"
            sign = "-" if c < 0 else "+"
            parts.append((sign, text))
        if not parts:
            return "0"
        first_sign, first = parts[0]
        out = ("-" if first_sign == "-" else "") + first
        for sign, text in parts[1:]:
            out += f" {sign} {text}"
        return out


@dataclass(frozen=True)
class PolynomialSystem:
    variant: str  # "w" or "ab"
    variable_names: tuple[str, ...]
    equations: tuple[Polynomial, ...]

    def __post_init__(self):
        nv = len(self.variable_names)
        for eq in self.equations:
            if eq.nvars != nv:
                raise ValueError("equation ring does not match the variable list")

    @property
    def is_square(self) -> bool:
        return len(self.equations) == len(self.variable_names)

    @property
    def degrees(self) -> list[int]:
        return [eq.total_degree for eq in self.equations]

    def monomial_lists(self) -> list[list[Monomial]]:
        return [eq.monomials() for eq in self.equations]

    def evaluate(self, values: Sequence) -> list:
        return [eq.evaluate(values) for eq in self.equations]

    def pretty(self) -> str:
        lines = [f"# variables: {', '.join(self.variable_names)}"]
        lines += [f"{eq.format(self.variable_names)} = 0" for eq in self.equations]
        return "\n".join(lines) + "\n"


def _exact_params(config: Configuration):
    return [(to_fraction(p.x), to_fraction(p.y), to_fraction(p.m)) for p in config.points]


def build_system_w(config: Configuration) -> PolynomialSystem:
    params = _exact_params(config)
    n = len(params)
    nv = n + 2
    x = Polynomial.variable(nv, 0)
    y = Polynomial.variable(nv, 1)
    w = [Polynomial.variable(nv, 2 + i) for i in range(n)]
    eq_x = x - sum((m * (x - xi) * w[i] ** 3 for i, (xi, _, m) in enumerate(params)), Polynomial(nv))
    eq_y = y - sum((m * (y - yi) * w[i] ** 3 for i, (_, yi, m) in enumerate(params)), Polynomial(nv))
    eqs = [eq_x, eq_y]
    for i, (xi, yi, _) in enumerate(params):
        eqs.append(w[i] ** 2 * ((x - xi) ** 2 + (y - yi) ** 2) - 1)
    names = ("x", "y") + tuple(f"w{i + 1}" for i in range(n))
    return PolynomialSystem("w", names, tuple(eqs))


def build_system_ab(config: Configuration) -> PolynomialSystem:
    params = _exact_params(config)
    n = len(params)
    nv = 3 * n
    a = [Polynomial.variable(nv, i) for i in range(n)]
    b = [Polynomial.variable(nv, n + i) for i in range(n)]
    w = [Polynomial.variable(nv, 2 * n + i) for i in range(n)]
    x1, y1, _ = params[0]
    eqs = [
        (a[0] + x1) - sum((m * a[i] * w[i] ** 3 for i, (_, _, m) in enumerate(params)), Polynomial(nv)),
        (b[0] + y1) - sum((m * b[i] * w[i] ** 3 for i, (_, _, m) in enumerate(params)), Polynomial(nv)),
    ]
    for i in range(n):
        eqs.append(w[i] ** 2 * (a[i] ** 2 + b[i] ** 2) - 1)
    for i in range(1, n):
        eqs.append(a[i] - a[0] - (x1 - params[i][0]))
    for i in range(1, n):
        eqs.append(b[i] - b[0] - (y1 - params[i][1]))
    names = (tuple(f"a{i + 1}" for i in range(n)) + tuple(f"b{i + 1}" for i in range(n))
             + tuple(f"w{i + 1}" for i in range(n)))
    return PolynomialSystem("ab", names, tuple(eqs))


def build_system(config: Configuration, variant: str) -> PolynomialSystem:
    if variant == "w":
        return build_system_w(config)
    if variant == "ab":
        return build_system_ab(config)
    raise ValueError(f"unknown system variant {variant!r} (expected 'w' or 'ab')")


class LiftError(ValueError):
    pass


def lift_point(system: PolynomialSystem, config: Configuration, x, y) -> list:
    """
    Values of all system variables at the planar point (x, y):
    w_i = 1/|z - z_i|, and for the ab system a_i = x - x_i, b_i = y - y_i.
    Exact inputs (Fractions) stay exact as long as every distance is rational.
    """
    exact = isinstance(x, Fraction) and isinstance(y, Fraction)
    params = _exact_params(config) if exact else [(float(p.x), float(p.y), float(p.m)) for p in config.points]
    dx = [x - xi for xi, _, _ in params]
    dy = [y - yi for _, yi, _ in params]
    w = []
    for i, (u, v) in enumerate(zip(dx, dy)):
        r2 = u * u + v * v
        if r2 == 0:
            raise LiftError(f"point coincides with mass {i}")
        if exact:
            num, den = r2.numerator, r2.denominator
            rn, rd = math.isqrt(num), math.isqrt(den)
            if rn * rn == num and rd * rd == den:
                w.append(Fraction(rd, rn))
                continue
        w.append(1.0 / math.sqrt(float(r2)))
    if system.variant == "w":
        return [x, y] + w
    return dx + dy + w


def lift_and_residual(system: PolynomialSystem, config: Configuration,
                      eq: Union[Equilibrium, tuple]) -> float:
    """Largest absolute equation residual after lifting a planar equilibrium."""
    if isinstance(eq, Equilibrium):
        x, y = eq.location
    else:
        x, y = eq
    values = lift_point(system, config, x, y)
    return max(abs(float(v)) for v in system.evaluate(values))


def substitute_ab_into_w(ab: PolynomialSystem, config: Configuration) -> list[Polynomial]:
    """
    Rewrite the ab system in the w-system ring via a_i = x - x_i,
    b_i = y - y_i. The first n + 2 results reproduce the w system and the
    difference equations collapse to zero.
    """
    params = _exact_params(config)
    n = len(params)
    nv = n + 2
    x = Polynomial.variable(nv, 0)
    y = Polynomial.variable(nv, 1)
    subs = ([x - xi for xi, _, _ in params] + [y - yi for _, yi, _ in params]
            + [Polynomial.variable(nv, 2 + i) for i in range(n)])
    out = []
    for eq in ab.equations:
        val = eq.evaluate(subs)
        out.append(val if isinstance(val, Polynomial) else Polynomial.constant(nv, val))
    return out


# -- supports -------------------------------------------------------------------

SupportSet = tuple[frozenset, ...]


def newton_supports(system: PolynomialSystem) -> SupportSet:
    return tuple(eq.support() for eq in system.equations)


def format_supports(supports: SupportSet) -> str:
    """One equation per line; exponent vectors as comma lists joined by ';'."""
    lines = []
    for supp in supports:
        vecs = sorted(supp, reverse=True)
        lines.append(";".join(",".join(str(e) for e in v) for v in vecs))
    return "\n".join(lines) + "\n"


def parse_supports(text: str) -> SupportSet:
    out = []
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        vecs = frozenset(tuple(int(e) for e in chunk.split(",")) for chunk in line.split(";"))
        out.append(vecs)
    return tuple(out)


# -- bounds -----------------------------------------------------------------------

def _check_n(n: int) -> int:
    if int(n) != n or n < 1:
        raise ValueError(f"n must be a positive integer, got {n!r}")
    return int(n)


def bezout_bound(n: int) -> int:
    """Product of the n + 2 quartic degrees: 4^(n+2)."""
    return 4 ** (_check_n(n) + 2)


def mv_formula(n: int) -> int:
    """Closed form (9n^2 + 3n - 4) 2^(n-1) of the mixed volumes of the w system."""
    n = _check_n(n)
    return (9 * n * n + 3 * n - 4) << (n - 1)


def mv_tilde_formula(n: int) -> int:
    """Closed form (9n^2 + n + 2) 2^(n-1) of the mixed volumes of the ab system."""
    n = _check_n(n)
    return (9 * n * n + n + 2) << (n - 1)


def conjectured_bound(n: int) -> int:
    """mv_tilde_formula(n) + 1: one extra solution may sit off the torus."""
    return mv_tilde_formula(n) + 1


@dataclass(frozen=True)
class ReferenceDegrees:
    """Published degrees of the w-system variety; never computed here."""

    generic: Mapping[int, int]
    two_mass_unit_axis: int  # masses at (1, 0) and (-1, 0)

    def lookup(self, n: int) -> Optional[int]:
        return self.generic.get(n)


_REFERENCE = ReferenceDegrees(generic={2: 120, 3: 696, 4: 3544}, two_mass_unit_axis=52)


def reference_degrees() -> ReferenceDegrees:
    return _REFERENCE


def count_bound(config: Configuration) -> int:
    """Tightest stored or closed-form upper bound that applies to ``config``."""
    n = config.n
    bounds = [bezout_bound(n), conjectured_bound(n)]
    ref = _REFERENCE.lookup(n)
    if ref is not None:
        bounds.append(ref)
    if n == 2 and sorted((to_fraction(p.x), to_fraction(p.y)) for p in config.points) == [(-1, 0), (1, 0)]:
        bounds.append(_REFERENCE.two_mass_unit_axis)
    return min(bounds)

