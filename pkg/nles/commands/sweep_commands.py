# =============================================================================
# SWEEP COMMANDS - nu_bar sweeps with per-run CSVs and a summary
# =============================================================================

import argparse

from nles import logger
from nles.commands import EXIT_OK
from nles.commands.common import add_experiment_arguments, load_from_args, output_dir, run_comments
from nles.config_utils import parse_number_list
from nles.harness import nu_bar_sweep
from nles.paths import run_path
from nles.results import write_series, write_summary


def cmd_sweep(args: argparse.Namespace) -> int:
    values = parse_number_list(args.nu_bar_values)
    exp = load_from_args(args)
    comments = run_comments(args, exp) + [f"flag nu_bar = {args.nu_bar_values}", f"jobs = {args.jobs}"]
    result = nu_bar_sweep(exp, values, jobs=args.jobs)

    out = output_dir(args)
    for index, (nu_bar, series) in enumerate(zip(result.nu_bar_values, result.series)):
        write_series(series, run_path(out, f"sweep_{index:02d}.csv"), comments + [f"sweep nu_bar = {float(nu_bar)!r}"])
    summary = run_path(out, "sweep_summary.csv")
    write_summary(
        summary,
        "nu_bar,plateau",
        list(zip(result.nu_bar_values, result.plateaus)),
        comments + [f"slope = {result.slope!r}"],
    )
    for nu_bar, plateau in zip(result.nu_bar_values, result.plateaus):
        logger.info("sweep", f"nu_bar={nu_bar:.3e} plateau={plateau:.6e}")
    logger.ok("sweep", f"fitted slope {result.slope:.4f} -> {summary}")
    return EXIT_OK


def register(subparsers) -> None:
    parser = subparsers.add_parser("sweep", help="nu_bar sweep of twin experiments")
    add_experiment_arguments(parser, single_nu_bar=False)
    parser.add_argument("--nu-bar", dest="nu_bar_values", required=True, help="comma-separated nu_bar values")
    parser.add_argument("--jobs", type=int, default=1, help="parallel sweep members")
    parser.set_defaults(handler=cmd_sweep)
