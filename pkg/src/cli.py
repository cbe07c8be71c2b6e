"""
reebflow command-line interface

Subcommands: volume, futaki, flow, minimize, soliton, entropy, report.
Human-readable output by default; --json switches to JSON-lines on stdout.
Logs go to stderr.
"""
import argparse
import logging
import sys
from contextlib import contextmanager
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

from .core.config import RunConfig, load_config
from .core.errors import ConfigError, InvalidInputError, ReebflowError
from .core.orchestrator import report
from .reeb_engine import __version__
from .reeb_engine import entropy, flow, soliton_ode
from .reeb_engine.quadrature import WeightedSphereLink
from .reeb_engine.reeb_cone import require_membership
from .reeb_engine.volume_futaki import futaki, volume_report
from .storage import artifacts
from .storage.models import ReebVector
from .utils.validators import parse_sweep, parse_vector, sweep_values

logger = logging.getLogger("reebflow")

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_USAGE = 2


class UsageError(InvalidInputError):
    """Bad command-line value; the message names the flag"""


def _flag_vector(text: str, flag: str, length: Optional[int] = None) -> tuple:
    try:
        values = parse_vector(text, flag)
    except ValueError as e:
        raise UsageError(str(e)) from None
    if length is not None and len(values) != length:
        raise UsageError(f"{flag}: expected {length} entries, got {len(values)}")
    return values


def _flag_reeb(text: str, flag: str, length: Optional[int] = None) -> ReebVector:
    values = _flag_vector(text, flag, length)
    try:
        return require_membership(values)
    except InvalidInputError as e:
        raise UsageError(f"{flag}: {e}") from None


@contextmanager
def _blame(flag: str):
    """Prefix engine errors raised while evaluating a flag's value with the flag name"""
    try:
        yield
    except UsageError:
        raise
    except ReebflowError as e:
        e.args = (f"{flag}: {e}",)
        raise


class Output:
    """Writes records as text lines or JSON-lines"""

    def __init__(self, json_lines: bool, stream=None):
        self.json_lines = json_lines
        self.stream = stream or sys.stdout

    def emit(self, record: Dict[str, Any], text: Optional[str] = None):
        if self.json_lines or text is None:
            artifacts.write_json_lines([record], self.stream)
        else:
            self.stream.write(text + "\n")


def _link(config: RunConfig, n: int) -> WeightedSphereLink:
    return WeightedSphereLink.from_config(config, n=n)


def _start(args, config: RunConfig):
    """Start vector and where it came from (the flag or the config key)"""
    if args.start:
        return _flag_reeb(args.start, "--start"), "--start"
    return ReebVector.of(config.default_start()), "flow.start"


# ============================================
# SUBCOMMANDS
# ============================================

def cmd_volume(args, config: RunConfig, out: Output) -> int:
    xi = _flag_reeb(args.reeb, "--reeb")
    with _blame("--reeb"):
        result = volume_report(_link(config, xi.n), xi)
    record = result.to_record()
    if args.relative:
        text = f"relative volume at {xi}: {result.relative_volume!r}"
    else:
        text = (f"volume at {xi}: {result.volume!r} (relative {result.relative_volume!r}), "
                f"grad {','.join(repr(g) for g in result.grad.coeffs)}")
    out.emit(record, text)
    return EXIT_OK


def cmd_futaki(args, config: RunConfig, out: Output) -> int:
    xi = _flag_reeb(args.reeb, "--reeb")
    direction = _flag_vector(args.direction, "--direction", xi.n + 1)
    with _blame("--reeb"):
        try:
            value = futaki(_link(config, xi.n), xi, direction)
        except InvalidInputError as e:
            raise UsageError(f"--direction: {e}") from None
    out.emit({"reeb": list(xi.coeffs), "direction": list(direction), "futaki": value},
             f"Fut at {xi} along {','.join(repr(b) for b in direction)}: {value!r}")
    return EXIT_OK


def cmd_flow(args, config: RunConfig, out: Output) -> int:
    start, source = _start(args, config)
    if args.mu and start.n != 1:
        raise UsageError(f"--mu: entropy along the flow needs n = 1, got n = {start.n}")
    with _blame(source):
        trajectory = flow.run_flow(_link(config, start.n), start, config.flow)
    if args.mu:
        with _blame("--mu"):
            trajectory = flow.attach_mu(trajectory, config.flow.mu_samples, config.soliton)
    if args.out:
        artifacts.write_csv(artifacts.trajectory_frame(trajectory), Path(args.out))
    if args.svg:
        artifacts.plot_trajectory(trajectory, Path(args.svg))
    final = trajectory.final
    out.emit(
        {"terminated_by": trajectory.terminated_by.value, "steps": len(trajectory.states) - 1,
         "t": final.t, "reeb": list(final.reeb.coeffs), "volume": final.volume, "grad_norm": final.grad_norm},
        f"flow {trajectory.terminated_by.value} after {len(trajectory.states) - 1} steps: "
        f"t={final.t:.6g}, reeb {final.reeb}, volume {final.volume!r}, |grad| {final.grad_norm:.3g}",
    )
    return EXIT_OK


def cmd_minimize(args, config: RunConfig, out: Output) -> int:
    start, source = _start(args, config)
    link = _link(config, start.n)
    iterates: List[Dict[str, Any]] = []

    def record(iteration, xi, vol, grad_norm):
        iterates.append({"iteration": iteration, "reeb": list(xi.coeffs), "volume": vol, "grad_norm": grad_norm})

    with _blame(source):
        minimizer = flow.minimize_volume(link, start, config.minimize, config.flow.boundary_guard, callback=record)
    last = iterates[-1]
    out.emit({"reeb": list(minimizer.coeffs), "iterations": last["iteration"], "volume": last["volume"],
              "grad_norm": last["grad_norm"]},
             f"minimizer {minimizer} after {last['iteration']} iterations "
             f"(volume {last['volume']!r}, |grad| {last['grad_norm']:.2e})")
    return EXIT_OK


def cmd_soliton(args, config: RunConfig, out: Output) -> int:
    if args.sweep:
        try:
            r_min, r_max, steps = parse_sweep(args.sweep, "--sweep")
        except ValueError as e:
            raise UsageError(str(e)) from None
        with _blame("--sweep"):
            points = soliton_ode.sweep(sweep_values(r_min, r_max, steps), config)
        if args.out:
            artifacts.write_csv(artifacts.sweep_frame(points), Path(args.out))
        if args.svg:
            artifacts.plot_sweep(points, Path(args.svg))
        for p in points:
            out.emit(p.model_dump(),
                     f"ratio {p.ratio:.6g}: b = {p.b:.10g}, residual {p.residual:.2e}, "
                     f"min K^T {p.min_curvature:.6g}, sign ok {p.sign_agrees}")
        return EXIT_OK

    a0, a1 = _flag_reeb(args.weights, "--weights", 2).coeffs
    with _blame("--weights"):
        profile = soliton_ode.solve_soliton(a0, a1, config.soliton)
    curvature = soliton_ode.transverse_curvature(profile)
    if args.out:
        potential = entropy.soliton_potential(profile, profile.grid_array, config.soliton)
        artifacts.write_csv(artifacts.profile_frame(profile, curvature, potential), Path(args.out))
    if args.svg:
        artifacts.plot_profile(profile, curvature, Path(args.svg))
    residual = soliton_ode.soliton_residual(profile)
    out.emit({"weights": list(profile.weights), "b": profile.b, "x_max": profile.x_max,
              "residual": residual, "min_curvature": float(curvature.min()), "metadata": profile.metadata},
             f"soliton {a0:g},{a1:g}: b = {profile.b!r}, x_max = {profile.x_max!r}, "
             f"residual {residual:.2e}, min K^T {curvature.min():.6g}")
    return EXIT_OK


def cmd_entropy(args, config: RunConfig, out: Output) -> int:
    a0, a1 = _flag_reeb(args.weights, "--weights", 2).coeffs
    with _blame("--weights"):
        result = entropy.entropy_report(soliton_ode.solve_soliton(a0, a1, config.soliton), config.soliton)
    out.emit(result, f"V = {result['V']!r}, W = {result['W']!r}, mu = {result['mu']!r}, "
                     f"A = {result['A']!r}, bound_ok = {result['bound_ok']}")
    return EXIT_OK


def cmd_report(args, config: RunConfig, out: Output) -> int:
    if args.out_dir:
        config.output.dir = args.out_dir
    summary = report(config)
    out.emit({"passed": summary.passed, "criteria": [c.model_dump() for c in summary.criteria],
              "files": summary.files}, summary.to_text().rstrip())
    return EXIT_OK if summary.passed else EXIT_FAILED


# ============================================
# PARSER
# ============================================

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="reebflow", description="Reeb vector volume flow on weighted Sasaki spheres")
    parser.add_argument('--config', type=str, default=None, help='Config file (key = value text or YAML)')
    parser.add_argument('--json', action='store_true', help='Emit JSON-lines instead of text')
    parser.add_argument('-v', '--verbose', action='store_true', help='Debug logging')
    parser.add_argument('--version', action='version', version=f'reebflow {__version__}')
    sub = parser.add_subparsers(dest='command', required=True)

    p = sub.add_parser('volume', help='Volume at a Reeb vector')
    p.add_argument('--reeb', required=True, help='Reeb vector a0,a1,...')
    p.add_argument('--relative', action='store_true', help='Report volume relative to the round sphere')
    p.set_defaults(handler=cmd_volume)

    p = sub.add_parser('futaki', help='Futaki invariant along a tangent direction')
    p.add_argument('--reeb', required=True, help='Reeb vector a0,a1,...')
    p.add_argument('--direction', required=True, help='Tangent direction b0,b1,... (sum 0)')
    p.set_defaults(handler=cmd_futaki)

    p = sub.add_parser('flow', help='Volume-decreasing flow')
    p.add_argument('--start', default=None, help='Start Reeb vector (default: flow.start)')
    p.add_argument('--out', default=None, help='Trajectory CSV')
    p.add_argument('--svg', default=None, help='Trajectory SVG')
    p.add_argument('--mu', action='store_true', help='Attach soliton entropy (n=1)')
    p.set_defaults(handler=cmd_flow)

    p = sub.add_parser('minimize', help='Damped Newton volume minimization')
    p.add_argument('--start', default=None, help='Start Reeb vector (default: flow.start)')
    p.set_defaults(handler=cmd_minimize)

    p = sub.add_parser('soliton', help='n=1 soliton profile or weight sweep')
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument('--weights', help='Weights a0,a1')
    group.add_argument('--sweep', help='Ratio sweep r_min:r_max:steps')
    p.add_argument('--out', default=None, help='Profile or sweep CSV')
    p.add_argument('--svg', default=None, help='Profile or sweep SVG')
    p.set_defaults(handler=cmd_soliton)

    p = sub.add_parser('entropy', help='W and mu for the n=1 soliton')
    p.add_argument('--weights', required=True, help='Weights a0,a1')
    p.set_defaults(handler=cmd_entropy)

    p = sub.add_parser('report', help='Full verification suite')
    p.add_argument('--out-dir', default=None, help='Override output.dir')
    p.set_defaults(handler=cmd_report)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Entry point; returns the process exit code"""
    parser = build_parser()
    args = parser.parse_args(argv)

    try:
        config = load_config(Path(args.config) if args.config else None)
    except ConfigError as e:
        print(f"reebflow: config error: {e}", file=sys.stderr)
        return EXIT_USAGE

    level = "DEBUG" if args.verbose else config.log_level
    logging.basicConfig(
        level=getattr(logging, level),
        format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
        stream=sys.stderr,
        force=True,
    )

    try:
        return args.handler(args, config, Output(args.json))
    except InvalidInputError as e:
        logger.error(f"❌ {e}")
        print(f"reebflow {args.command}: {e}", file=sys.stderr)
        return EXIT_USAGE
    except ReebflowError as e:
        logger.error(f"❌ {e}")
        print(f"reebflow {args.command}: {e}", file=sys.stderr)
        return EXIT_FAILED


if __name__ == "__main__":
    sys.exit(main())
