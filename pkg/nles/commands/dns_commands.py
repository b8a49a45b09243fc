# =============================================================================
# DNS COMMANDS - Reference-only runs with checkpoints and spectra
# =============================================================================

import argparse
import os

import numpy as np

from nles import logger
from nles.checkpoint import CheckpointManager, read_checkpoint
from nles.commands import EXIT_OK
from nles.commands.common import add_experiment_arguments, load_from_args, output_dir, run_comments
from nles.harness import TwinExperiment
from nles.monitoring import RunMonitor
from nles.results import write_spectrum
from nles.solvers import SimState, advance, log_start, random_solenoidal_field
from nles.spectral import energy_spectrum, leray_project


def _resume_state(out: str, exp: TwinExperiment, manager: CheckpointManager) -> SimState:
    path = CheckpointManager.latest(out)
    if path is None:
        raise FileNotFoundError(f"--resume given but no checkpoint in {out}")
    checkpoint = read_checkpoint(path)
    if checkpoint.grid != exp.grid:
        raise ValueError(f"checkpoint grid {checkpoint.grid} does not match experiment grid {exp.grid}")
    v = checkpoint.fields[0]
    if checkpoint.version != 2:
        logger.warn("dns", f"{path} is a version {checkpoint.version} checkpoint; the resumed run is not bit-exact")
        v = leray_project(v)
    manager.resume(checkpoint.time)
    logger.info("dns", f"resuming from {path} at t={checkpoint.time:.6g}")
    return SimState(v, t=checkpoint.time)


def cmd_dns(args: argparse.Namespace) -> int:
    """Run the reference model for spinup_time + t_end, checkpointing as it goes."""
    exp = load_from_args(args)
    config = exp.reference_config
    out = output_dir(args)
    comments = run_comments(args, exp)
    interval = args.checkpoint_interval if args.checkpoint_interval is not None else 10.0 * exp.record_interval
    manager = CheckpointManager(out, interval, version=args.checkpoint_version)

    def save(state: SimState) -> None:
        path = manager.save([state.v], state.t)
        write_spectrum(energy_spectrum(state.v), os.path.splitext(path)[0] + "_spectrum.csv", comments)

    def on_step(state: SimState) -> None:
        if manager.due(state.t):
            save(state)

    log_start("dns", config)
    if args.resume:
        state = _resume_state(out, exp, manager)
    else:
        rng = np.random.default_rng(exp.seed)
        state = SimState(random_solenoidal_field(exp.grid, rng, exp.initial_wavenumber, exp.initial_energy))
        on_step(state)
    t_target = exp.spinup_time + config.t_end
    if state.t >= t_target - 1e-12:
        logger.ok("dns", f"checkpoint at t={state.t:.6g} already covers t={t_target:.6g}; nothing to run")
        return EXIT_OK
    state = advance(
        state,
        config,
        t_target,
        monitor=RunMonitor("dns"),
        label="reference",
        on_step=on_step,
    )
    save(state)
    logger.ok("dns", f"reference run reached t={state.t:.6g} after {state.step_count} steps; output in {out}")
    return EXIT_OK


def register(subparsers) -> None:
    parser = subparsers.add_parser("dns", help="run the reference model only")
    add_experiment_arguments(parser)
    parser.add_argument("--checkpoint-interval", dest="checkpoint_interval", type=float, default=None)
    parser.add_argument("--checkpoint-version", dest="checkpoint_version", type=int, choices=(1, 2), default=1)
    parser.add_argument(
        "--resume", action="store_true", help="continue from the newest checkpoint in the output directory"
    )
    parser.set_defaults(handler=cmd_dns)
