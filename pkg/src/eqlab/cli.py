"""
Command-line front end.

Exit codes: 0 success, 1 I/O or validation error, 2 degenerate equilibria
found (solve, ring) or a failed check (verify).
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import sys
from fractions import Fraction
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import polysys
from .families import lagrange_config, triangle_config
from .io import DEFAULT_CAP, ConfigError, contour_grid, dumps, load_config, result_to_dict
from .model import Configuration
from .ring import RingConfig, mass_sweep, ring_census
from .solver import SolveOptions, morse_report, solve

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_FLAGGED = 2

LIFT_TOL = 1e-8

log = logging.getLogger("eqlab")


class UsageError(Exception):
    pass


def rational(text: str) -> Fraction:
    """argparse type for numbers given as decimals or p/q."""
    try:
        return Fraction(text.strip())
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a number or p/q: {text!r}") from None


def positive_int(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    return v


def _add_source(p: argparse.ArgumentParser, required: bool = True) -> None:
    g = p.add_mutually_exclusive_group(required=required)
    g.add_argument("--config", metavar="PATH", help="configuration JSON {\"masses\": [{x, y, m}, ...]}")
    g.add_argument("--ring", nargs=3, metavar=("N", "M", "C"), type=str,
                   help="ring of N masses: central mass C, N-1 peripheral masses M on the unit circle")
    g.add_argument("--lagrange", nargs=2, metavar=("M1", "M2"), type=rational,
                   help="two masses on a unit-angular-speed circular orbit")
    g.add_argument("--triangle", metavar="M", type=rational,
                   help="three equal masses on a unit-angular-speed equilateral triangle")


def _add_solver_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--spacing", type=float, metavar="X", help="seed lattice spacing (default: derived)")
    p.add_argument("--tol", type=float, metavar="X", help="Newton residual tolerance (default: 1e-12*scale)")


def _add_out(p: argparse.ArgumentParser) -> None:
    p.add_argument("--out", metavar="PATH", help="write output here instead of stdout")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="eqlab",
        description="Equilibria of |z|^2/2 + sum m_i/|z - z_i|: find, classify, verify.",
    )
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="find and classify all equilibria, emit JSON")
    _add_source(p)
    _add_solver_flags(p)
    _add_out(p)

    p = sub.add_parser("verify", help="solve, then check counting identities and bounds")
    _add_source(p)
    _add_solver_flags(p)
    _add_out(p)

    p = sub.add_parser("ring", help="equilibrium census of a ring, per ray family")
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--ring", nargs=3, metavar=("N", "M", "C"), type=str)
    g.add_argument("--lagrange", nargs=2, metavar=("M1", "M2"), type=rational)
    _add_solver_flags(p)
    _add_out(p)

    p = sub.add_parser("sweep", help="ring census over log-spaced mass ratios m/c (c = 1), CSV")
    p.add_argument("n_total", type=positive_int, metavar="N")
    p.add_argument("--sweep", nargs=3, metavar=("MIN", "MAX", "STEPS"), type=str, required=True)
    p.add_argument("--linear", action="store_true", help="linear instead of geometric spacing")
    _add_solver_flags(p)
    _add_out(p)

    p = sub.add_parser("contour", help="potential on a grid (clamped), CSV")
    _add_source(p)
    p.add_argument("--contour", nargs=5, metavar=("XMIN", "XMAX", "YMIN", "YMAX", "RES"), type=str,
                   required=True)
    p.add_argument("--cap", type=float, default=DEFAULT_CAP)
    _add_out(p)

    p = sub.add_parser("polysys", help="polynomial reformulation or its Newton polytope supports")
    _add_source(p)
    p.add_argument("--variant", default="w", help="w: (x, y, w_i); ab: (a_i, b_i, w_i)")
    p.add_argument("--format", default="pretty", help="pretty | supports")
    _add_out(p)
    return parser


def _ring_from_args(vals: Sequence[str]) -> RingConfig:
    try:
        n = int(vals[0])
    except ValueError:
        raise UsageError(f"--ring N: not an integer: {vals[0]!r}") from None
    try:
        m, c = (Fraction(v) for v in vals[1:])
    except (ValueError, ZeroDivisionError):
        raise UsageError(f"--ring M C: not numbers: {vals[1:]!r}") from None
    try:
        return RingConfig(n, m, c)
    except ValueError as exc:
        raise UsageError(f"--ring: {exc}") from None


def _config_from_args(args) -> Configuration:
    try:
        if getattr(args, "config", None):
            return load_config(args.config)
        if getattr(args, "ring", None):
            return _ring_from_args(args.ring).to_configuration()
        if getattr(args, "lagrange", None):
            return lagrange_config(*args.lagrange)
        if getattr(args, "triangle", None) is not None:
            return triangle_config(args.triangle)
    except OSError as exc:
        raise UsageError(f"cannot read configuration: {exc}") from None
    except ConfigError as exc:
        raise UsageError(f"bad configuration: {exc}") from None
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    raise UsageError("no configuration given")


def _opts_from_args(args) -> SolveOptions:
    try:
        return SolveOptions(grid_spacing=args.spacing, newton_tolerance=args.tol)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _emit(text: str, out: Optional[str]) -> None:
    if out:
        try:
            Path(out).write_text(text)
        except OSError as exc:
            raise UsageError(f"cannot write {out}: {exc}") from None
    else:
        sys.stdout.write(text)


def cmd_solve(args) -> int:
    config = _config_from_args(args)
    eqs, report = solve(config, _opts_from_args(args))
    _emit(dumps(result_to_dict(config, eqs, report)), args.out)
    return EXIT_FLAGGED if report.degenerate_found else EXIT_OK


def cmd_ring(args) -> int:
    opts = _opts_from_args(args)
    if args.ring:
        ring = _ring_from_args(args.ring)
        census = ring_census(ring, opts)
        report = morse_report(census.equilibria, ring.n_total)
        doc = {
            "n": ring.n_total,
            "m": str(polysys.to_fraction(ring.m)),
            "c": str(polysys.to_fraction(ring.c)),
            "total": census.total,
            "ray_a_count": census.ray_a,
            "ray_b_count": census.ray_b,
            "off_ray_count": census.off_ray,
            "ray_a_radii": list(census.ray_a_radii),
            "ray_b_radii": list(census.ray_b_radii),
            "consistent": census.consistent,
            "report": report.to_dict(),
            "equilibria": [eq.to_dict() for eq in census.equilibria],
        }
    else:
        config = _config_from_args(args)
        eqs, report = solve(config, opts)
        doc = {
            "n": config.n,
            "total": len(eqs),
            "ray_a_count": None,
            "ray_b_count": None,
            "off_ray_count": None,
            "report": report.to_dict(),
            "equilibria": [eq.to_dict() for eq in eqs],
        }
    _emit(dumps(doc), args.out)
    return EXIT_FLAGGED if report.degenerate_found else EXIT_OK


def sweep_ratios(lo: float, hi: float, steps: int, linear: bool = False) -> list[float]:
    if steps < 1:
        raise UsageError("--sweep STEPS must be at least 1")
    if not (math.isfinite(lo) and math.isfinite(hi)) or not 0 < lo <= hi:
        raise UsageError("--sweep needs 0 < MIN <= MAX")
    if steps == 1:
        if lo != hi:
            raise UsageError("--sweep with one step needs MIN == MAX")
        return [lo]
    if lo == hi:
        raise UsageError("--sweep with several steps needs MIN < MAX")
    vals = np.linspace(lo, hi, steps) if linear else np.geomspace(lo, hi, steps)
    vals[0], vals[-1] = lo, hi
    return [float(v) for v in vals]


def cmd_sweep(args) -> int:
    try:
        lo, hi = float(Fraction(args.sweep[0])), float(Fraction(args.sweep[1]))
        steps = int(args.sweep[2])
    except (ValueError, ZeroDivisionError):
        raise UsageError(f"--sweep MIN MAX STEPS: cannot parse {args.sweep!r}") from None
    if args.n_total < 4:
        raise UsageError("sweep needs N >= 4")
    ratios = sweep_ratios(lo, hi, steps, args.linear)
    result = mass_sweep(args.n_total, ratios, _opts_from_args(args))
    _emit(result.to_csv(), args.out)
    return EXIT_OK


def cmd_contour(args) -> int:
    config = _config_from_args(args)
    try:
        xmin, xmax, ymin, ymax = (float(Fraction(v)) for v in args.contour[:4])
        res = int(args.contour[4])
    except (ValueError, ZeroDivisionError):
        raise UsageError(f"--contour: cannot parse {args.contour!r}") from None
    try:
        grid = contour_grid(config, xmin, xmax, ymin, ymax, res, args.cap)
    except ValueError as exc:
        raise UsageError(f"--contour: {exc}") from None
    _emit(grid.to_csv(), args.out)
    return EXIT_OK


def cmd_polysys(args) -> int:
    if args.variant not in ("w", "ab"):
        raise UsageError(f"--variant must be 'w' or 'ab', got {args.variant!r}")
    if args.format not in ("pretty", "supports"):
        raise UsageError(f"--format must be 'pretty' or 'supports', got {args.format!r}")
    config = _config_from_args(args)
    system = polysys.build_system(config, args.variant)
    if args.format == "pretty":
        text = system.pretty()
    else:
        text = polysys.format_supports(polysys.newton_supports(system))
    _emit(text, args.out)
    return EXIT_OK


def verify_checks(config: Configuration, opts: Optional[SolveOptions] = None):
    """Solve and run every counting check; returns (checks, equilibria, report)."""
    eqs, report = solve(config, opts)
    n = config.n
    n0, n1, n2 = report.counts
    N = len(eqs)
    checks = []

    def add(name, ok, detail):
        checks.append((name, "PASS" if ok else "FAIL", detail))

    add("nondegenerate", not report.degenerate_found,
        f"{report.n_degenerate} degenerate critical point(s); equilibria may not be isolated"
        if report.degenerate_found else "all Hessians regular")
    add("lower_bound", report.lower_bound_ok, f"N={report.total} >= n+1={n + 1}")
    add("weak_morse", report.weak_morse_ok, f"N0={n0} >= 1, N1={n1} >= n={n}")
    add("euler", report.euler_ok, f"N0-N1+N2={report.euler_sum} == 1-n={1 - n}")
    add("bezout_bound", N <= polysys.bezout_bound(n), f"N={N} <= 4^(n+2)={polysys.bezout_bound(n)}")
    add("mixed_volume_bound", N <= polysys.conjectured_bound(n),
        f"N={N} <= MV~+1={polysys.conjectured_bound(n)}")
    ref = polysys.reference_degrees().lookup(n)
    if ref is None:
        checks.append(("reference_degree", "SKIP", f"no stored degree for n={n}"))
    else:
        add("reference_degree", N <= ref, f"N={N} <= {ref}")
    for variant in ("w", "ab"):
        system = polysys.build_system(config, variant)
        worst = max((polysys.lift_and_residual(system, config, eq) for eq in eqs), default=0.0)
        add(f"lift_{variant}", worst <= LIFT_TOL, f"max residual {worst:.3g} <= {LIFT_TOL:g}")
    return checks, eqs, report


def cmd_verify(args) -> int:
    config = _config_from_args(args)
    checks, _, _ = verify_checks(config, _opts_from_args(args))
    text = "".join(f"{status} {name}: {detail}\n" for name, status, detail in checks)
    _emit(text, args.out)
    failed = any(status == "FAIL" for _, status, _ in checks)
    return EXIT_FLAGGED if failed else EXIT_OK


COMMANDS = {
    "solve": cmd_solve,
    "verify": cmd_verify,
    "ring": cmd_ring,
    "sweep": cmd_sweep,
    "contour": cmd_contour,
    "polysys": cmd_polysys,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits with 2 on usage errors; 2 means "flagged" here
        return EXIT_OK if exc.code == 0 else EXIT_ERROR
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"eqlab: error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
