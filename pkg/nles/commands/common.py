# =============================================================================
# COMMON - Shared argument handling for the command groups
# =============================================================================
"""
Flags shared by the experiment commands and the translation of flags into
experiment-file overrides. Flags win over file keys and are echoed into
every output file as comment lines.
"""

import argparse
from typing import Dict, List

from nles import __version__
from nles.config_manager import experiment_sections, load_experiment
from nles.harness import TwinExperiment
from nles.paths import ensure_dir, get_output_dir


def add_experiment_arguments(parser: argparse.ArgumentParser, single_nu_bar: bool = True) -> None:
    parser.add_argument("experiment", help="INI experiment file")
    parser.add_argument("--seed", type=int, default=None, help="random seed (overrides [harness] seed)")
    parser.add_argument("--out", default=None, help="output directory (default: NLES_OUTPUT_DIR or ./runs)")
    parser.add_argument("--t-end", dest="t_end", type=float, default=None, help="simulated run length")
    parser.add_argument("--resolution", type=int, default=None, help="grid points per axis")
    if single_nu_bar:
        parser.add_argument("--nu-bar", dest="nu_bar", default=None, help="nudged-model turbulence viscosity")


def overrides_from_args(args: argparse.Namespace) -> Dict[str, str]:
    overrides: Dict[str, str] = {}
    if getattr(args, "seed", None) is not None:
        overrides["harness.seed"] = str(args.seed)
    if getattr(args, "t_end", None) is not None:
        overrides["reference.t_end"] = repr(float(args.t_end))
        overrides["nudged.t_end"] = repr(float(args.t_end))
    if getattr(args, "resolution", None) is not None:
        overrides["grid.n"] = str(args.resolution)
    if isinstance(getattr(args, "nu_bar", None), str):
        overrides["nudged.nu_bar"] = args.nu_bar
    return overrides


def load_from_args(args: argparse.Namespace) -> TwinExperiment:
    return load_experiment(args.experiment, overrides_from_args(args))


def output_dir(args: argparse.Namespace) -> str:
    return ensure_dir(args.out or get_output_dir())


def run_comments(args: argparse.Namespace, exp: TwinExperiment) -> List[str]:
    """Code version, applied flag overrides and the fully resolved experiment."""
    lines = [f"nles {__version__}", f"experiment file = {args.experiment}"]
    for key, value in overrides_from_args(args).items():
        lines.append(f"flag {key} = {value}")
    for section, items in experiment_sections(exp).items():
        for key, value in items.items():
            lines.append(f"[{section}] {key} = {value}")
    return lines
