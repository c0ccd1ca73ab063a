# app/main.py


"""Command-line entry point.

Responsibilities:
1. Parse the subcommand and its flags (shared run flags are accepted after
   any subcommand).
2. Build the RunConfig (defaults -> --config file -> flags), optionally save it.
3. Configure logging on stderr, run the command, write the report to stdout
   (or --out) as JSON or CSV.
4. Map failures to exit codes: 2 usage, 3 precondition, 4 precision/resource,
   1 anything unexpected. A height whose budget ran out still writes its
   partial report before exiting with 4.

Examples:
    python app/main.py lattes --curve 0,0,0,0,1 --m 2
    python app/main.py height --curve 0,0,0,0,1 --m 2 --point 1/1
    python app/main.py skeleton --curve tate_x3_6 --p 3 --t 1/3 1/2 --output csv
    python app/main.py tower --curve x3_minus_2 --p 7 --m 2 --q0 3 --depth 2
"""

import argparse
import logging
import sys
from typing import List, Optional

from cli import commands
from cli.report_writer import write_report
from cli.settings import OUTPUT_FORMATS, build_config, configure_logging, save_settings
from cli.worker import BATCH_COMMANDS, run_batch
from processing.elliptic_lattes import EllipticCurve, parse_curve
from processing.errors import LattesHeightError, PrecisionError, PreconditionError, ResourceError
from processing.file_handler import fixture_by_name, load_fixtures

logger = logging.getLogger("main")

EXIT_OK = 0
EXIT_UNEXPECTED = 1
EXIT_USAGE = 2
EXIT_PRECONDITION = 3
EXIT_RESOURCE = 4


def _multiplier(text: str) -> int:
    try:
        m = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"--m must be an integer, got {text!r}")
    if abs(m) < 2:
        raise argparse.ArgumentTypeError(f"--m needs |m| >= 2, got {m}")
    return m


def _prime(text: str) -> int:
    try:
        p = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"--p must be a prime, got {text!r}")
    if p < 2 or any(p % k == 0 for k in range(2, int(p ** 0.5) + 1)):
        raise argparse.ArgumentTypeError(f"--p must be a prime, got {p}")
    return p


def _run_flags() -> argparse.ArgumentParser:
    """Flags shared by every subcommand; unset ones stay None so --config can fill them."""
    common = argparse.ArgumentParser(add_help=False)
    group = common.add_argument_group("run configuration")
    group.add_argument("--config", metavar="PATH", help="JSON settings file (flat dict of run options)")
    group.add_argument("--save-config", metavar="PATH", help="write the effective settings to PATH")
    group.add_argument("--precision", type=int, help="p-adic precision N (default 40)")
    group.add_argument("--truncation", type=int, help="Laurent truncation K (default: auto)")
    group.add_argument("--tol", type=float, help="canonical height tolerance (default 1e-6)")
    group.add_argument("--depth", type=int, help="tower depth (default 2)")
    group.add_argument("--output", choices=OUTPUT_FORMATS, help="report format (default json)")
    group.add_argument("--out", metavar="PATH", help="write the report to PATH instead of stdout")
    group.add_argument("--jobs", type=int, help="parallel batch items (default 1)")
    group.add_argument("--max-bits", dest="max_bits", type=int, help="bit budget per coordinate (default 2^25)")
    group.add_argument("--max-iterations", dest="max_iterations", type=int, help="iteration cap (default 64)")
    group.add_argument("--ramification", dest="e", type=int, help="ramification index e for (1/e)Z checks (default 1)")
    group.add_argument("--dps", type=int, help="decimal digits for numeric root finding (default 50)")
    group.add_argument("--verbose", action="store_true", help="INFO-level logging on stderr")
    group.add_argument("--log-json", dest="log_json", action="store_true", help="JSON log records")
    return common


def build_parser() -> argparse.ArgumentParser:
    common = _run_flags()
    parser = argparse.ArgumentParser(
        prog="lattes-heights",
        description="Lattès maps, canonical heights and Tate-curve skeleta over Q.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name: str, help_text: str) -> argparse.ArgumentParser:
        return sub.add_parser(name, parents=[common], help=help_text)

    curve_help = "a1,a2,a3,a4,a6 or a fixture name"

    p = add("lattes", "print the Lattès map of [m]")
    p.add_argument("--curve", required=True, help=curve_help)
    p.add_argument("--m", type=_multiplier, default=2)

    for name, text in (("height", "canonical height of a point"), ("preperiodic", "exact orbit classification")):
        p = add(name, text)
        p.add_argument("--curve", required=True, help=curve_help)
        p.add_argument("--m", type=_multiplier, default=2)
        p.add_argument("--point", required=True, help='a/b, integer or "inf"')

    p = add("skeleton", "seminorm valuation of x on the skeleton")
    p.add_argument("--curve", required=True, help=curve_help)
    p.add_argument("--p", type=_prime, required=True)
    p.add_argument("--t", nargs="+", required=True, help="log-radii in (0, v(q)), e.g. 1/3 1/2")

    p = add("tate-verify", "evaluate Tate's series at zeta and check the curve equation")
    p.add_argument("--curve", required=True, help=curve_help)
    p.add_argument("--p", type=_prime, required=True)
    p.add_argument("--zeta", nargs="+", required=True, help="rationals with 0 <= v(zeta) < v(q)")

    p = add("q-from-j", "Tate parameter of a curve or of an explicit j")
    target = p.add_mutually_exclusive_group(required=True)
    target.add_argument("--curve", help=curve_help)
    target.add_argument("--j", help="j-invariant as a/b")
    p.add_argument("--p", type=_prime, required=True)

    p = add("tower", "preimage tower of q0 at a good-reduction prime")
    p.add_argument("--curve", required=True, help=curve_help)
    p.add_argument("--p", type=_prime, required=True)
    p.add_argument("--m", type=_multiplier, default=2)
    p.add_argument("--q0", required=True, help="finite rational a/b")

    p = add("spectrum", "Newton-polygon root valuations of an integer polynomial")
    p.add_argument("--poly", required=True, help='e.g. "x^2 - 3"')
    p.add_argument("--p", type=_prime, required=True)

    p = add("batch", "run a command over every fixture")
    p.add_argument("--fixtures", metavar="PATH", help="YAML corpus (default: bundled fixtures)")
    p.add_argument("--run", dest="batch_command", choices=BATCH_COMMANDS, required=True)
    p.add_argument("--m", type=_multiplier, default=2)
    return parser


def resolve_curve(text: str) -> EllipticCurve:
    if "," in text:
        return parse_curve(text)
    return fixture_by_name(load_fixtures(), text.strip()).curve


def dispatch(args, config) -> dict:
    name = args.command
    if name == "batch":
        return run_batch(load_fixtures(args.fixtures), args.batch_command, config, m=args.m)
    if name == "spectrum":
        return commands.cmd_spectrum(args.poly, args.p, config)
    if name == "q-from-j":
        curve = resolve_curve(args.curve) if args.curve else None
        return commands.cmd_q_from_j(curve, args.p, config, j=args.j)

    curve = resolve_curve(args.curve)
    if name == "lattes":
        return commands.cmd_lattes(curve, args.m, config)
    if name == "height":
        return commands.cmd_height(curve, args.m, args.point, config)
    if name == "preperiodic":
        return commands.cmd_preperiodic(curve, args.m, args.point, config)
    if name == "skeleton":
        return commands.cmd_skeleton(curve, args.p, args.t, config)
    if name == "tate-verify":
        return commands.cmd_tate_verify(curve, args.p, args.zeta, config)
    if name == "tower":
        return commands.cmd_tower(curve, args.p, args.m, args.q0, config)
    raise LattesHeightError(f"unknown command {name!r}")


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code in (0, None) else EXIT_USAGE

    try:
        config = build_config(args)
    except PreconditionError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    configure_logging(config.verbose, config.log_json)
    if args.save_config:
        save_settings(config, args.save_config)
        logger.info("settings saved to %s", args.save_config)

    try:
        report = dispatch(args, config)
    except PreconditionError as exc:
        logger.error("precondition failed: %s", exc)
        return EXIT_PRECONDITION
    except (PrecisionError, ResourceError) as exc:
        logger.error("%s: %s", type(exc).__name__, exc)
        return EXIT_RESOURCE
    except Exception:
        logger.exception("unexpected failure")
        return EXIT_UNEXPECTED

    if args.out:
        with open(args.out, "w", newline="") as f:
            write_report(report, config.output, f)
    else:
        write_report(report, config.output)
    if report.get("status") == commands.BUDGET_EXHAUSTED:
        return EXIT_RESOURCE
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
