"""
quantum_frenet - Command-line interface.
"""

import argparse
import logging
import sys
from pathlib import Path
from typing import Optional, Sequence

from . import __version__
from .checks import DEFAULT_DRAWS, DEFAULT_SEED
from .exceptions import InvalidConfigError, QuantumFrenetError
from .modes import run_scenario, sweep_scenario, validate_suite

LOG_FORMAT = "%(levelname)s %(name)s: %(message)s"


def _parse_values(text: str) -> list:
    """
    Parse a comma-separated list of numbers.

    Raises:
        InvalidConfigError: If an entry is not a number
    """
    values = []
    for item in text.split(","):
        item = item.strip()
        if not item:
            continue
        try:
            values.append(float(item))
        except ValueError:
            raise InvalidConfigError(f"--values: '{item}' is not a number")
    return values


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="quantum-frenet",
        description="Curvature and torsion of quantum evolutions on the Bloch sphere and beyond.",
        epilog="Examples:\n"
               "  Run a scenario:   quantum-frenet run rabi_weak.json -o out/\n"
               "  Check invariants: quantum-frenet validate --seed 7\n"
               "  Sweep a param:    quantum-frenet sweep rabi_weak.json --param Omega0 --values 0.1,1.0 -o sweep/",
        formatter_class=argparse.RawDescriptionHelpFormatter
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true", help="Enable debug logging")
    commands = parser.add_subparsers(dest="command", required=True)

    run = commands.add_parser("run", help="Simulate one scenario and write its artifacts")
    run.add_argument("config", type=Path, help="Scenario JSON file")
    run.add_argument("-o", "--output", type=Path, required=True, help="Output directory")

    validate = commands.add_parser("validate", help="Run the invariant suite")
    validate.add_argument("--seed", type=int, default=DEFAULT_SEED, help=f"Random seed (default {DEFAULT_SEED})")
    validate.add_argument("--draws", type=int, default=DEFAULT_DRAWS,
                          help=f"Random draws per check (default {DEFAULT_DRAWS})")

    sweep = commands.add_parser("sweep", help="Run a scenario once per value of one parameter")
    sweep.add_argument("config", type=Path, help="Scenario JSON file")
    sweep.add_argument("--param", required=True, help="Scenario parameter to vary, e.g. Omega0")
    sweep.add_argument("--values", required=True, help="Comma-separated values, e.g. 0.1,1.0")
    sweep.add_argument("-o", "--output", type=Path, required=True, help="Output directory")
    return parser


def main(argv: Optional[Sequence[str]] = None):
    """Main entry point for the quantum-frenet CLI."""
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format=LOG_FORMAT)

    try:
        if args.command == "run":
            run_scenario(args.config, args.output)
        elif args.command == "sweep":
            sweep_scenario(args.config, args.param, _parse_values(args.values), args.output)
        elif not validate_suite(args.seed, args.draws):
            sys.exit(1)

    except QuantumFrenetError as e:
        print(f"❌ Error: {e}", file=sys.stderr)
        sys.exit(e.exit_code)
    except KeyboardInterrupt:
        print("\n⚠️  Operation cancelled by user", file=sys.stderr)
        sys.exit(130)
    except Exception as e:
        print(f"❌ Unexpected error: {e}", file=sys.stderr)
        sys.exit(1)


if __name__ == "__main__":
    main()
