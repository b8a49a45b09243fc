# =============================================================================
# ORACLE COMMANDS - Brute-force cross-check suites
# =============================================================================

import argparse

from nles import logger
from nles.commands import EXIT_FAILURE, EXIT_OK
from nles.oracles import SUITES, run_suites


def cmd_oracle(args: argparse.Namespace) -> int:
    results = run_suites(args.suite, seed=args.seed)
    for result in results:
        print(result.line())
    failed = [r for r in results if not r.passed]
    if failed:
        logger.error("oracle", f"{len(failed)} of {len(results)} checks failed")
        return EXIT_FAILURE
    logger.ok("oracle", f"all {len(results)} checks passed")
    return EXIT_OK


def register(subparsers) -> None:
    parser = subparsers.add_parser("oracle", help="run brute-force oracle suites")
    parser.add_argument("--suite", default="all", choices=["all"] + list(SUITES))
    parser.add_argument("--seed", type=int, default=0)
    parser.set_defaults(handler=cmd_oracle)
