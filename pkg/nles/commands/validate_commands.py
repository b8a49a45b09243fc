# =============================================================================
# VALIDATE COMMANDS - Data-assimilation condition report
# =============================================================================
"""
``validate`` checks an experiment against the synchronization conditions.

Violated conditions are reported as WARN and still exit 0: they are
sufficient conditions, not requirements. Only an invalid experiment file
exits 1.
"""

import argparse

import numpy as np

from nles import logger
from nles.commands import EXIT_OK
from nles.commands.common import add_experiment_arguments, load_from_args
from nles.interpolants import estimate_constants, observed_fraction, observed_mode_count
from nles.les_terms import make_forcing
from nles.solvers import describe, grashof, validate_da_conditions
from nles.spectral import random_band_limited

# Random fields behind the empirical c_I and c0 estimates
DEFAULT_SAMPLES = 100


def cmd_validate(args: argparse.Namespace) -> int:
    exp = load_from_args(args)
    config = exp.nudged_config
    grid = config.grid
    spec = config.interpolant

    rng = np.random.default_rng(exp.seed)
    samples = [random_band_limited(grid, rng) for _ in range(args.samples)]
    constants = estimate_constants(spec, samples)
    c0 = spec.c0 if spec.c0 is not None else constants.c0

    G = grashof(make_forcing(config.forcing, grid), config.nu, grid.lambda1)
    report = validate_da_conditions(config, G, c0)

    print(f"experiment: {args.experiment}")
    print(f"nudged model: {describe(config)}")
    print(
        f"estimated constants over {constants.samples} samples: "
        f"c_I = {constants.c_I:.6g}, c0 = {constants.c0:.6g}"
    )
    if spec.kind == "fourier_truncation":
        print(
            f"observed modes: {observed_mode_count(spec, grid)} "
            f"({100.0 * observed_fraction(spec, grid):.3g}% of active modes)"
        )
    for line in report.lines():
        print(line)

    if report.status == "warn":
        logger.warn("validate", "some data-assimilation conditions are not met; synchronization is not guaranteed")
    return EXIT_OK


def register(subparsers) -> None:
    parser = subparsers.add_parser("validate", help="check data-assimilation conditions")
    add_experiment_arguments(parser)
    parser.add_argument(
        "--samples", type=int, default=DEFAULT_SAMPLES, help="random fields for the constant estimates"
    )
    parser.set_defaults(handler=cmd_validate)
