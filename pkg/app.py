"""Command-line entry point.

Loads ``.env``, registers the command groups and dispatches to the chosen
command. Exit codes: 0 success, 1 validation failure, 2 numerical divergence.
"""

import argparse
import sys
from typing import List, Optional

from dotenv import load_dotenv

from nles import __version__, logger
from nles.commands import EXIT_DIVERGED, EXIT_FAILURE
from nles.commands import dns_commands, oracle_commands, sweep_commands, twin_commands, validate_commands
from nles.solvers import SimulationDivergedError


COMMAND_GROUPS = (dns_commands, twin_commands, sweep_commands, validate_commands, oracle_commands)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="nles",
        description="Nudged Ladyzhenskaya LES: twin experiments on the periodic box",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    subparsers = parser.add_subparsers(dest="command", required=True)
    for group in COMMAND_GROUPS:
        group.register(subparsers)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    load_dotenv()
    args = build_parser().parse_args(argv)
    try:
        return args.handler(args)
    except SimulationDivergedError as exc:
        logger.error(args.command, f"numerical divergence: {exc}")
        return EXIT_DIVERGED
    except (ValueError, OSError) as exc:
        logger.error(args.command, str(exc))
        return EXIT_FAILURE


if __name__ == "__main__":
    sys.exit(main())
