# cli.py - Command-line front end: distributions, moments, ordering tables and simulated experiments
import argparse
import json
import math
import sys
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Optional, Sequence, Tuple

from config import config, OUTPUT_FORMATS, LOG_LEVELS
from fock import StateSpec, build_state, oracle_moment
from homodyne import (
    DetectorModel, InsufficientSamples, check_targets, detector_params, reconstruct, write_samples_csv,
)
from logging_system import advanced_logger, get_logger, log_error, set_level
from moments import expectation_from_g, moment_expansion, photon_number_from_g
from ordering import OrderingParams, OrderingRangeError, ordering_residual, ordering_terms
from phasespace import (
    PhaseSpaceField, QuadratureGrid, SmoothingWidths, g_grid, q_exact_grid, smooth, wigner_grid, write_field,
)
from utils import ToolkitError, ValidationError, complex_to_json, format_duration, format_float

logger = get_logger('toolkit')

DISTRIBUTIONS = ("wigner", "q", "g", "husimi")


class UsageError(ValidationError):
    pass


class ToolkitArgumentParser(argparse.ArgumentParser):
    """argparse with the toolkit's one-line error format."""

    def error(self, message):
        print(f"error=UsageError message={message}", file=sys.stderr)
        raise SystemExit(2)


@dataclass(frozen=True)
class RunConfig:
    state: StateSpec
    dim: int
    grid: QuadratureGrid
    eta1: float
    eta2: float
    sigma1: Optional[float]
    sigma2: Optional[float]
    count: int
    seed: int
    output: Optional[Path]
    format: str

    @classmethod
    def from_args(cls, args: argparse.Namespace) -> "RunConfig":
        """Validate flags (falling back to configuration) before any computation runs."""
        if args.dim < 2:
            raise UsageError(f"--dim must be at least 2, got {args.dim}")
        if args.count < 1:
            raise InsufficientSamples(f"--count must be at least 1, got {args.count}")
        run = cls(
            state=StateSpec.parse(args.state),
            dim=args.dim,
            grid=QuadratureGrid(args.grid_min, args.grid_max, args.grid_step),
            eta1=args.eta1,
            eta2=args.eta2,
            sigma1=getattr(args, "sigma1", None),
            sigma2=getattr(args, "sigma2", None),
            count=args.count,
            seed=args.seed,
            output=Path(args.output) if args.output else None,
            format=args.format,
        )
        run.detector()
        return run

    def detector(self) -> DetectorModel:
        return detector_params(self.eta1, self.eta2)

    def widths(self) -> SmoothingWidths:
        """Explicit --sigma1/--sigma2 win over the efficiency map."""
        if (self.sigma1 is None) != (self.sigma2 is None):
            raise UsageError("--sigma1 and --sigma2 must be given together")
        if self.sigma1 is not None and self.sigma2 is not None:
            return SmoothingWidths(self.sigma1, self.sigma2)
        return self.detector().widths

    def params(self) -> OrderingParams:
        widths = self.widths()
        return OrderingParams.from_widths(widths.sigma1, widths.sigma2)


def _parse_target(text: str) -> Tuple[int, int]:
    try:
        n, m = (int(part) for part in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"target must look like n,m (got {text!r})")
    return n, m


def _parse_rational(text: str) -> Fraction:
    try:
        value = Fraction(text)
        finite = math.isfinite(float(value))
    except (ValueError, ZeroDivisionError, OverflowError):
        finite = False
    if not finite:
        raise argparse.ArgumentTypeError(f"not a finite real number: {text!r}")
    return value


def _emit_json(payload: dict, output: Optional[Path]):
    text = json.dumps(payload, indent=2)
    print(text)
    if output:
        output.write_text(text + "\n", encoding="utf-8")


def cmd_dist(args: argparse.Namespace) -> int:
    run = RunConfig.from_args(args)
    rho = build_state(run.state, run.dim)
    which = args.which

    if which == "wigner":
        field = wigner_grid(rho, run.grid)
    elif which == "q":
        field = q_exact_grid(rho, run.grid)
    elif which == "husimi":
        sigma1 = run.sigma1 if run.sigma1 is not None else 0.5
        field = smooth(wigner_grid(rho, run.grid), SmoothingWidths(sigma1, 0.25 / sigma1))
    else:
        field = g_grid(rho, run.widths(), run.grid)

    output = run.output or Path(f"{which}.{run.format}")
    write_field(field, output, run.format)
    print(f"normalization={format_float(field.normalization())} min={format_float(field.min_value)} "
          f"physical={'true' if field.physical else 'false'}")
    return 0


def cmd_moments(args: argparse.Namespace) -> int:
    run = RunConfig.from_args(args)
    targets = check_targets(args.targets)
    rho = build_state(run.state, run.dim)
    params = run.params()
    field: PhaseSpaceField = g_grid(rho, run.widths(), run.grid)

    entries = []
    for n, m in targets:
        if (n, m) == (1, 1):
            estimate = photon_number_from_g(field, params)
        else:
            estimate = expectation_from_g(field, moment_expansion(params, n, m, rho.dim))
        oracle = oracle_moment(rho, n, m)
        entries.append({
            "target": [n, m],
            "g_path_value": complex_to_json(estimate.value),
            "oracle_value": complex_to_json(oracle),
            "abs_error": abs(estimate.value - oracle),
        })

    _emit_json({
        "state": rho.label,
        "sigma1": field.sigma1,
        "sigma2": field.sigma2,
        "s": params.s,
        "r": params.r,
        "entries": entries,
    }, run.output)
    return 0


def cmd_simulate(args: argparse.Namespace) -> int:
    run = RunConfig.from_args(args)
    rho = build_state(run.state, run.dim)
    report = reconstruct(rho, run.detector(), args.targets, run.count, run.seed, run.grid)
    if args.emit_samples:
        write_samples_csv(report.samples, args.emit_samples)
    _emit_json(report.to_json(), run.output)
    print(f"wall_time={format_duration(report.wall_time)}", file=sys.stderr)
    return 0


def cmd_ordering(args: argparse.Namespace) -> int:
    try:
        terms = ordering_terms(args.n, args.m, args.s)
        lines = [f"k={k}: {format_float(float(coefficient))}" for k, coefficient in terms]
    except OverflowError:
        raise OrderingRangeError(f"coefficients of ({args.n}, {args.m}) overflow a float at s={float(args.s):g}")
    print("\n".join(lines))
    if args.check:
        params = OrderingParams.from_sr(float(args.s), args.r)
        residual = ordering_residual(args.n, args.m, params, args.dim)
        print(f"residual={format_float(residual)}")
    return 0


def _add_run_flags(parser: argparse.ArgumentParser, targets: bool = False, widths: bool = True):
    parser.add_argument("--state", default="vacuum", help="State spec kind:args, e.g. coherent:1.5+0i, fock:2")
    parser.add_argument("--dim", type=int, default=config.DIM, help="Fock truncation")
    parser.add_argument("--grid-min", type=float, default=config.GRID_MIN)
    parser.add_argument("--grid-max", type=float, default=config.GRID_MAX)
    parser.add_argument("--grid-step", type=float, default=config.GRID_STEP)
    parser.add_argument("--eta1", type=float, default=1.0, help="Efficiency of the alpha_1 detector")
    parser.add_argument("--eta2", type=float, default=1.0, help="Efficiency of the alpha_2 detector")
    # simulate derives its widths from the detector efficiencies
    if widths:
        parser.add_argument("--sigma1", type=float, default=None, help="Smoothing width along alpha_1")
        parser.add_argument("--sigma2", type=float, default=None, help="Smoothing width along alpha_2")
    parser.add_argument("--count", type=int, default=config.COUNT, help="Monte Carlo sample count")
    parser.add_argument("--seed", type=int, default=config.SEED, help="PCG64 seed")
    parser.add_argument("--output", default=None, help="Output path")
    parser.add_argument("--format", choices=OUTPUT_FORMATS, default=config.FORMAT)
    if targets:
        parser.add_argument("--targets", type=_parse_target, nargs="+", default=[(1, 1)],
                            help="Moments n,m of a^dagger^n a^m (n+m <= 4)")


def build_parser() -> argparse.ArgumentParser:
    parser = ToolkitArgumentParser(
        prog="gsw",
        description="Gaussian-smoothed Wigner distributions, the ordering rule and simulated imperfect-detector homodyne runs",
    )
    parser.add_argument("--log-level", choices=LOG_LEVELS, default=None, help="Console log verbosity")
    commands = parser.add_subparsers(dest="command", required=True)

    dist = commands.add_parser("dist", help="Export a W, Q, Husimi or G distribution")
    _add_run_flags(dist)
    dist.add_argument("--which", choices=DISTRIBUTIONS, default="wigner")
    dist.set_defaults(handler=cmd_dist)

    moments = commands.add_parser("moments", help="Recover <a^dagger^n a^m> from G by grid quadrature")
    _add_run_flags(moments, targets=True)
    moments.set_defaults(handler=cmd_moments)

    simulate = commands.add_parser("simulate", help="Sample joint counts and reconstruct moments")
    _add_run_flags(simulate, targets=True, widths=False)
    simulate.add_argument("--emit-samples", default=None, help="Also write the SampleSet CSV here")
    simulate.set_defaults(handler=cmd_simulate)

    ordering = commands.add_parser("ordering", help="Print the contraction coefficients of {b^dagger^n b^m}")
    ordering.add_argument("n", type=int)
    ordering.add_argument("m", type=int)
    ordering.add_argument("--s", type=_parse_rational, required=True, help="Ordering parameter")
    ordering.add_argument("--check", action="store_true", help="Verify the matrix identity and print the residual")
    ordering.add_argument("--dim", type=int, default=32)
    ordering.add_argument("--r", type=float, default=0.0, help="Squeeze parameter for --check")
    ordering.set_defaults(handler=cmd_ordering)

    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)

    if args.log_level:
        set_level(args.log_level)

    health = config.get_health_status()
    if not health["valid"]:
        for problem in health["errors"]:
            print(f"error=InvalidConfig message={problem}", file=sys.stderr)
        return 2

    try:
        status = args.handler(args)
        stats = advanced_logger.get_log_stats()
        timings = ", ".join(f"{k} {format_duration(v)}" for k, v in stats["stages"].items())
        logger.debug(f"📊 Stage timings: {timings} ({stats['warnings']} warnings)")
        return status
    except ToolkitError as e:
        print(f"error={e.reason} message={e}", file=sys.stderr)
        log_error(e, {"command": args.command})
        return e.exit_code
    except Exception as e:
        print(f"error={type(e).__name__} message={e}", file=sys.stderr)
        log_error(e, {"command": args.command})
        return 1


if __name__ == "__main__":
    sys.exit(main())
