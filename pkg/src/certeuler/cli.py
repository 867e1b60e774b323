"""Command-line front end: solve built-in or parsed polynomial systems,
emit certified results, and benchmark the effect of compression.

Exit codes: 0 solved and certificate clean, 2 configuration error,
3 domain/ball range error, 4 certificate violation.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence, TextIO

from .euler import (
    ConfigurationError,
    EulerProblem,
    defect_certificate,
    eval_solution,
    global_error_bound,
    max_denominator_bits,
    solution_to_csv,
    solution_to_json_dict,
    solve_chained,
)
from .expr import derive_ucf, parse_rhs
from .rational import check_precision, format_rational
from .systems import get_system, registry_json
from .ucf import DomainError

__all__ = ["RunConfig", "build_problem", "run", "bench", "main"]

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_RANGE = 3
EXIT_CERTIFICATE = 4


@dataclass
class RunConfig:
    """Everything one solver invocation needs."""

    system: Optional[str] = None
    rhs_text: Optional[str] = None
    x0: Optional[tuple[Fraction, ...]] = None
    p: int = 10
    t_end: Fraction = Fraction(1, 2)
    t_a: Optional[Fraction] = None
    x_b: Optional[Fraction] = None
    bound_c: Optional[Fraction] = None
    lipschitz_l: Optional[Fraction] = None
    compress: bool = True
    output: str = "json"  # json | csv | decimal
    samples: int = 2
    out_path: Optional[str] = None

    def __post_init__(self):
        check_precision(self.p)
        if self.t_end <= 0:
            raise ConfigurationError("t_end must be positive")
        if self.samples < 1:
            raise ConfigurationError("samples must be >= 1")
        if self.output not in ("json", "csv", "decimal"):
            raise ConfigurationError(f"unknown output format {self.output!r}")
        if (self.system is None) == (self.rhs_text is None):
            raise ConfigurationError("give exactly one of a system name or an rhs expression")


def build_problem(config: RunConfig) -> EulerProblem:
    """Resolve the configured system into a validated EulerProblem."""
    if config.system is not None:
        spec = get_system(config.system)
        return spec.problem(
            x0=config.x0,
            t_a=config.t_a,
            x_b=config.x_b,
            bound_c=config.bound_c,
            lipschitz_l=config.lipschitz_l,
        )
    if config.x0 is None:
        raise ConfigurationError("--x0 is required with --rhs")
    if config.t_a is None or config.x_b is None:
        raise ConfigurationError("--t-a and --x-b are required with --rhs (derivation box)")
    expr = parse_rhs(config.rhs_text, len(config.x0))
    rhs, C, L = derive_ucf(expr, (config.t_a, config.x0, config.x_b))
    return EulerProblem(
        rhs=rhs,
        x0=config.x0,
        t_a=config.t_a,
        x_b=config.x_b,
        bound_c=config.bound_c if config.bound_c is not None else C,
        lipschitz_l=config.lipschitz_l if config.lipschitz_l is not None else L,
    )


def _decimal_digits(p: int) -> int:
    # ceil(p log10 2) + 1, via exact integer arithmetic
    return len(str(1 << p)) + 1


def _decimal_str(q: Fraction, digits: int, round_up: bool = False) -> str:
    scale = 10 ** digits
    num = q.numerator * scale
    den = q.denominator
    if round_up:
        scaled = -((-num) // den)  # ceil
    else:
        scaled = (2 * num + den) // (2 * den)  # nearest, half toward +inf
    sign = "-" if scaled < 0 else ""
    scaled = abs(scaled)
    whole, frac = divmod(scaled, scale)
    return f"{sign}{whole}.{frac:0{digits}d}"


def _rounding_error(q: Fraction, digits: int) -> Fraction:
    scale = 10 ** digits
    scaled = (2 * q.numerator * scale + q.denominator) // (2 * q.denominator)
    return abs(q - Fraction(scaled, scale))


def _format_value(value: Sequence[Fraction], bound: Optional[Fraction], config: RunConfig) -> str:
    if config.output == "decimal":
        digits = _decimal_digits(config.p)
        parts = []
        for c in value:
            extra = _rounding_error(c, digits)
            total = (bound if bound is not None else Fraction(0)) + extra
            parts.append(f"{_decimal_str(c, digits)} ± {_decimal_str(total, digits, round_up=True)}")
        return "(" + ", ".join(parts) + ")"
    return "(" + ", ".join(format_rational(c) for c in value) + ")"


def run(config: RunConfig, stdout: TextIO = None) -> int:
    """Solve, certify, emit; returns the process exit code."""
    out = stdout if stdout is not None else sys.stdout
    try:
        problem = build_problem(config)
        t0 = time.perf_counter()
        sol = solve_chained(problem, config.p, config.t_end, config.compress)
        solve_seconds = time.perf_counter() - t0
        t0 = time.perf_counter()
        report = defect_certificate(sol, problem, config.samples, config.compress)
        cert_seconds = time.perf_counter() - t0
        value = eval_solution(sol, config.t_end)
        bound = None
        if problem.lipschitz_l is not None:
            bound = global_error_bound(config.p, problem.lipschitz_l, config.t_end)
    except ConfigurationError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except DomainError as exc:
        print(f"range error: {exc}", file=sys.stderr)
        return EXIT_RANGE

    name = config.system if config.system is not None else f"rhs {config.rhs_text!r}"
    print(f"system: {name}", file=out)
    print(
        f"p: {config.p}  horizon: {format_rational(sol.horizon)}  "
        f"steps: {len(sol.slopes)}  compress: {'on' if config.compress else 'off'}",
        file=out,
    )
    print(f"x({format_rational(config.t_end)}) = {_format_value(value, bound, config)}", file=out)
    print(f"defect bound: 2^-{config.p}", file=out)
    if bound is not None:
        print(
            f"global error bound vs exact solution: {format_rational(bound)}"
            f" (~{_decimal_str(bound, _decimal_digits(config.p), round_up=True)})",
            file=out,
        )
    if report:
        print(f"defect certificate: FAIL ({len(report)} violation(s), "
              f"{config.samples} sample(s)/segment)", file=out)
        for violation in report[:10]:
            print(f"  {violation}", file=out)
    else:
        print(f"defect certificate: PASS ({config.samples} sample(s)/segment)", file=out)
    print(f"solve time: {solve_seconds:.3f} s  certificate time: {cert_seconds:.3f} s", file=out)

    if config.out_path:
        if config.output == "csv":
            with open(config.out_path, "w") as fh:
                fh.write(solution_to_csv(sol))
        else:
            with open(config.out_path, "w") as fh:
                json.dump(solution_to_json_dict(sol), fh)
                fh.write("\n")
        print(f"solution written to {config.out_path}", file=out)

    return EXIT_OK if not report else EXIT_CERTIFICATE


def bench(config: RunConfig, repeat: int, stdout: TextIO = None) -> list[dict]:
    """With/without-compression comparison harness.

    Emits CSV rows (compress, steps, wall_time_s, max_slope_den_bits) and
    returns them as dicts.
    """
    out = stdout if stdout is not None else sys.stdout
    if repeat < 1:
        raise ConfigurationError("repeat must be >= 1")
    problem = build_problem(config)
    rows = []
    print("compress,steps,wall_time_s,max_slope_den_bits", file=out)
    for compress in (False, True):
        for _ in range(repeat):
            t0 = time.perf_counter()
            sol = solve_chained(problem, config.p, config.t_end, compress)
            seconds = time.perf_counter() - t0
            row = {
                "compress": compress,
                "steps": len(sol.slopes),
                "wall_time_s": seconds,
                "max_slope_den_bits": max_denominator_bits(sol.slopes),
            }
            rows.append(row)
            print(
                f"{'on' if compress else 'off'},{row['steps']},"
                f"{row['wall_time_s']:.4f},{row['max_slope_den_bits']}",
                file=out,
            )
    return rows


# ---------------------------------------------------------------------------
# argument parsing


def _fraction_arg(text: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise argparse.ArgumentTypeError(f"not a rational: {text!r} ({exc})")


def _vector_arg(text: str) -> tuple[Fraction, ...]:
    try:
        return tuple(Fraction(part.strip()) for part in text.split(","))
    except (ValueError, ZeroDivisionError) as exc:
        raise argparse.ArgumentTypeError(f"not a rational vector: {text!r} ({exc})")


def _add_common(p: argparse.ArgumentParser) -> None:
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--system", help="built-in system name (see 'certeuler systems')")
    src.add_argument("--rhs", help="polynomial rhs, components separated by ';' (e.g. '-x2; x1')")
    p.add_argument("--x0", type=_vector_arg, help="initial state, comma-separated rationals")
    p.add_argument("--p", type=int, required=True, help="precision exponent: defect <= 2^-p")
    p.add_argument("--t-end", type=_fraction_arg, required=True, help="target time (rational)")
    p.add_argument("--t-end-scale", type=_fraction_arg, default=Fraction(1),
                   help="multiplier applied to --t-end (e.g. --t-end 355/113 --t-end-scale 2)")
    p.add_argument("--t-a", type=_fraction_arg, help="time half-width of the validity box")
    p.add_argument("--x-b", type=_fraction_arg, help="state 1-norm radius of the validity box")
    p.add_argument("--C", dest="bound_c", type=_fraction_arg, help="bound on |f|_1 over the box")
    p.add_argument("--L", dest="lipschitz_l", type=_fraction_arg, help="Lipschitz constant of f in x")
    p.add_argument("--no-compress", action="store_true", help="disable real-number compression")
    p.add_argument("--format", choices=("json", "csv", "decimal"), default="json",
                   help="value rendering on stdout and --out file format")
    p.add_argument("--samples", type=int, default=2, help="certificate samples per segment")
    p.add_argument("--out", dest="out_path", metavar="FILE", help="write the full solution here")


def _config_from_args(args: argparse.Namespace) -> RunConfig:
    return RunConfig(
        system=args.system,
        rhs_text=args.rhs,
        x0=args.x0,
        p=args.p,
        t_end=args.t_end * args.t_end_scale,
        t_a=args.t_a,
        x_b=args.x_b,
        bound_c=args.bound_c,
        lipschitz_l=args.lipschitz_l,
        compress=not args.no_compress,
        output=args.format,
        samples=args.samples,
        out_path=args.out_path,
    )


def main(argv: Optional[list[str]] = None) -> int:
    parser = argparse.ArgumentParser(
        prog="certeuler",
        description="Certified exact-rational Euler integration of initial value problems.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run_parser = sub.add_parser("run", help="solve an IVP and certify the defect bound")
    _add_common(run_parser)

    bench_parser = sub.add_parser("bench", help="compare runs with and without compression")
    _add_common(bench_parser)
    bench_parser.add_argument("--repeat", type=int, default=1, help="repetitions per flag value")

    sub.add_parser("systems", help="list built-in systems as JSON")

    args = parser.parse_args(argv)
    if args.command == "systems":
        print(registry_json())
        return EXIT_OK
    try:
        config = _config_from_args(args)
        if args.command == "run":
            return run(config)
        return_rows = bench(config, args.repeat)
        return EXIT_OK if return_rows else EXIT_CONFIG
    except ConfigurationError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except DomainError as exc:
        print(f"range error: {exc}", file=sys.stderr)
        return EXIT_RANGE
    except ValueError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
