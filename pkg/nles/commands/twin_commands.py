# =============================================================================
# TWIN COMMANDS - One twin experiment to an error-series CSV
# =============================================================================

import argparse

from nles import logger
from nles.commands import EXIT_OK
from nles.commands.common import add_experiment_arguments, load_from_args, output_dir, run_comments
from nles.harness import run_twin
from nles.paths import run_path
from nles.results import write_series


def cmd_twin(args: argparse.Namespace) -> int:
    exp = load_from_args(args)
    series = run_twin(exp)
    path = run_path(output_dir(args), args.name)
    write_series(series, path, run_comments(args, exp))
    logger.ok(
        "twin",
        f"{len(series)} records, final l2_abs={series.l2_abs[-1]:.6e} l2_rel={series.l2_rel[-1]:.6e} -> {path}",
    )
    return EXIT_OK


def register(subparsers) -> None:
    parser = subparsers.add_parser("twin", help="run a full twin experiment")
    add_experiment_arguments(parser)
    parser.add_argument("--name", default="error_series.csv", help="output file name")
    parser.set_defaults(handler=cmd_twin)
