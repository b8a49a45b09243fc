# =============================================================================
# CONFIG MANAGER - INI-backed experiment configuration
# =============================================================================
"""
Experiment files: INI documents describing one twin experiment.

Sections and keys::

    [grid]          dim, n
    [reference]     solver keys (model defaults to nse, mu to 0)
    [nudged]        solver keys (model defaults to ladyzhenskaya, mu to 30)
    [observation]   kind, h
    [harness]       spinup_time, record_interval, seed, initial_wavenumber,
                    initial_energy, nudged_start, tail_fraction, max_t_end,
                    wall_clock_cap

Solver keys: model, nu, nu_bar, c_s, p, mu, cfl, dt_max, dt_min, t_end,
picard_sweeps, picard_tol, forcing, forcing_amplitude, forcing_wavenumber.

``nu_bar = auto`` derives (c_s / n)^2. Optional harness limits accept
``none``. Numbers may be written as fractions (``h = 1/9``).
"""

import configparser
import difflib
import os
from typing import Callable, Dict, Mapping, Optional

from nles.config_utils import parse_number
from nles.harness import TwinExperiment
from nles.interpolants import InterpolantSpec
from nles.les_terms import ForcingSpec, default_forcing
from nles.solvers import ConfigInvariantError, SolverConfig
from nles.spectral import Grid


class ExperimentConfigError(ValueError):
    """Invalid experiment file; ``key`` names the offending ``section.key``."""

    def __init__(self, key: str, message: str) -> None:
        self.key = key
        super().__init__(message)


# =============================================================================
# SCHEMA
# =============================================================================

SOLVER_KEYS = (
    "model",
    "nu",
    "nu_bar",
    "c_s",
    "p",
    "mu",
    "cfl",
    "dt_max",
    "dt_min",
    "t_end",
    "picard_sweeps",
    "picard_tol",
    "forcing",
    "forcing_amplitude",
    "forcing_wavenumber",
)

SCHEMA = {
    "grid": ("dim", "n"),
    "reference": SOLVER_KEYS,
    "nudged": SOLVER_KEYS,
    "observation": ("kind", "h"),
    "harness": (
        "spinup_time",
        "record_interval",
        "seed",
        "initial_wavenumber",
        "initial_energy",
        "nudged_start",
        "tail_fraction",
        "max_t_end",
        "wall_clock_cap",
    ),
}

GRID_DEFAULTS = {"dim": 2, "n": 64}

SOLVER_DEFAULTS = {
    "reference": {"model": "nse", "mu": 0.0},
    "nudged": {"model": "ladyzhenskaya", "mu": 30.0},
}

_NONE_WORDS = ("none", "auto", "")


def _suggest(word: str, choices) -> str:
    match = difflib.get_close_matches(word, list(choices), n=1)
    return f"; did you mean {match[0]!r}?" if match else ""


# =============================================================================
# VALUE PARSING
# =============================================================================


class _Section:
    """Typed accessors over one parsed section, with key-named errors."""

    def __init__(self, name: str, values: Mapping[str, str]) -> None:
        self.name = name
        self.values = dict(values)

    def _convert(self, key: str, kind: str, convert: Callable[[str], object]):
        raw = self.values[key]
        try:
            return convert(raw)
        except (ValueError, ZeroDivisionError) as exc:
            raise ExperimentConfigError(
                f"{self.name}.{key}", f"[{self.name}] {key}: expected {kind}, got {raw!r}"
            ) from exc

    def number(self, key: str, default: float) -> float:
        if key not in self.values:
            return default
        return self._convert(key, "a number", parse_number)

    def integer(self, key: str, default: int) -> int:
        if key not in self.values:
            return default
        return self._convert(key, "an integer", lambda s: int(s.strip()))

    def optional_number(self, key: str, default: Optional[float]) -> Optional[float]:
        if key not in self.values:
            return default
        if self.values[key].strip().lower() in _NONE_WORDS:
            return None
        return self.number(key, 0.0)

    def text(self, key: str, default: str) -> str:
        return self.values.get(key, default).strip()


def _invariant_error(section: str, exc: ValueError) -> ExperimentConfigError:
    key = exc.key if isinstance(exc, ConfigInvariantError) else section
    return ExperimentConfigError(f"{section}.{key}", f"[{section}] {exc}")


# =============================================================================
# PARSE
# =============================================================================


def _read_sections(text: str, overrides: Optional[Mapping[str, str]]) -> Dict[str, _Section]:
    parser = configparser.ConfigParser(interpolation=None)
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ExperimentConfigError("document", f"malformed experiment file: {exc}") from exc

    raw: Dict[str, Dict[str, str]] = {name: {} for name in SCHEMA}
    for section in parser.sections():
        if section not in SCHEMA:
            raise ExperimentConfigError(section, f"unknown section [{section}]{_suggest(section, SCHEMA)}")
        raw[section].update(parser[section])

    for dotted, value in (overrides or {}).items():
        section, _, key = dotted.partition(".")
        if section not in SCHEMA:
            raise ExperimentConfigError(dotted, f"unknown override {dotted!r}")
        raw[section][key] = str(value)

    for section, values in raw.items():
        for key in values:
            if key not in SCHEMA[section]:
                raise ExperimentConfigError(
                    f"{section}.{key}",
                    f"unknown key {key!r} in [{section}]{_suggest(key, SCHEMA[section])}",
                )
    return {name: _Section(name, values) for name, values in raw.items()}


def _build_forcing(sec: _Section, dim: int) -> ForcingSpec:
    base = default_forcing(dim)
    try:
        return ForcingSpec(
            kind=sec.text("forcing", base.kind),
            amplitude=sec.number("forcing_amplitude", base.amplitude),
            wavenumber=sec.integer("forcing_wavenumber", base.wavenumber),
        )
    except ExperimentConfigError:
        raise
    except ValueError as exc:
        raise ExperimentConfigError(f"{sec.name}.forcing", f"[{sec.name}] {exc}") from exc


def _build_solver(sec: _Section, grid: Grid, interpolant: InterpolantSpec) -> SolverConfig:
    defaults = SolverConfig(grid=grid, interpolant=interpolant, **SOLVER_DEFAULTS[sec.name])
    try:
        return SolverConfig(
            grid=grid,
            model=sec.text("model", defaults.model),
            nu=sec.number("nu", defaults.nu),
            nu_bar=sec.optional_number("nu_bar", defaults.nu_bar),
            c_s=sec.number("c_s", defaults.c_s),
            p=sec.number("p", defaults.p),
            mu=sec.number("mu", defaults.mu),
            interpolant=interpolant,
            forcing=_build_forcing(sec, grid.dim),
            cfl=sec.number("cfl", defaults.cfl),
            dt_max=sec.number("dt_max", defaults.dt_max),
            dt_min=sec.number("dt_min", defaults.dt_min),
            t_end=sec.number("t_end", defaults.t_end),
            picard_sweeps=sec.integer("picard_sweeps", defaults.picard_sweeps),
            picard_tol=sec.number("picard_tol", defaults.picard_tol),
        )
    except ExperimentConfigError:
        raise
    except ValueError as exc:
        raise _invariant_error(sec.name, exc) from exc


def parse_experiment(text: str, overrides: Optional[Mapping[str, str]] = None) -> TwinExperiment:
    """Parse, default and validate an experiment document.

    ``overrides`` maps ``section.key`` to a value and wins over the document.
    """
    sections = _read_sections(text, overrides)

    grid_sec = sections["grid"]
    try:
        grid = Grid(
            dim=grid_sec.integer("dim", GRID_DEFAULTS["dim"]),
            n=grid_sec.integer("n", GRID_DEFAULTS["n"]),
        )
    except ExperimentConfigError:
        raise
    except ValueError as exc:
        raise ExperimentConfigError("grid", f"[grid] {exc}") from exc

    obs = sections["observation"]
    base_obs = InterpolantSpec()
    try:
        interpolant = InterpolantSpec(kind=obs.text("kind", base_obs.kind), h=obs.number("h", base_obs.h))
    except ExperimentConfigError:
        raise
    except ValueError as exc:
        raise ExperimentConfigError("observation", f"[observation] {exc}") from exc

    reference = _build_solver(sections["reference"], grid, interpolant)
    nudged = _build_solver(sections["nudged"], grid, interpolant)

    h = sections["harness"]
    base = TwinExperiment(reference, nudged)
    try:
        return TwinExperiment(
            reference_config=reference,
            nudged_config=nudged,
            spinup_time=h.number("spinup_time", base.spinup_time),
            record_interval=h.number("record_interval", base.record_interval),
            seed=h.integer("seed", base.seed),
            initial_wavenumber=h.number("initial_wavenumber", base.initial_wavenumber),
            initial_energy=h.number("initial_energy", base.initial_energy),
            nudged_start=h.text("nudged_start", base.nudged_start),
            tail_fraction=h.number("tail_fraction", base.tail_fraction),
            max_t_end=h.optional_number("max_t_end", base.max_t_end),
            wall_clock_cap=h.optional_number("wall_clock_cap", base.wall_clock_cap),
        )
    except ExperimentConfigError:
        raise
    except ValueError as exc:
        raise _invariant_error("harness", exc) from exc


def load_experiment(path: str, overrides: Optional[Mapping[str, str]] = None) -> TwinExperiment:
    """Read and parse an experiment file; the file itself is never modified."""
    if not os.path.exists(path):
        raise FileNotFoundError(f"experiment file not found: {path}")
    with open(path, "r", encoding="utf-8") as f:
        return parse_experiment(f.read(), overrides)


# =============================================================================
# SERIALIZE
# =============================================================================


def _fmt(value) -> str:
    if value is None:
        return "none"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _solver_items(config: SolverConfig) -> Dict[str, str]:
    return {
        "model": config.model,
        "nu": _fmt(config.nu),
        "nu_bar": "auto" if config.nu_bar is None else _fmt(float(config.nu_bar)),
        "c_s": _fmt(float(config.c_s)),
        "p": _fmt(float(config.p)),
        "mu": _fmt(float(config.mu)),
        "cfl": _fmt(float(config.cfl)),
        "dt_max": _fmt(float(config.dt_max)),
        "dt_min": _fmt(float(config.dt_min)),
        "t_end": _fmt(float(config.t_end)),
        "picard_sweeps": _fmt(int(config.picard_sweeps)),
        "picard_tol": _fmt(float(config.picard_tol)),
        "forcing": config.forcing.kind,
        "forcing_amplitude": _fmt(float(config.forcing.amplitude)),
        "forcing_wavenumber": _fmt(int(config.forcing.wavenumber)),
    }


def experiment_sections(exp: TwinExperiment) -> Dict[str, Dict[str, str]]:
    """Canonical key/value text of every section, in schema order."""
    grid = exp.grid
    interpolant = exp.nudged_config.interpolant
    return {
        "grid": {"dim": _fmt(grid.dim), "n": _fmt(grid.n)},
        "reference": _solver_items(exp.reference_config),
        "nudged": _solver_items(exp.nudged_config),
        "observation": {"kind": interpolant.kind, "h": _fmt(float(interpolant.h))},
        "harness": {
            "spinup_time": _fmt(float(exp.spinup_time)),
            "record_interval": _fmt(float(exp.record_interval)),
            "seed": _fmt(int(exp.seed)),
            "initial_wavenumber": _fmt(float(exp.initial_wavenumber)),
            "initial_energy": _fmt(float(exp.initial_energy)),
            "nudged_start": exp.nudged_start,
            "tail_fraction": _fmt(float(exp.tail_fraction)),
            "max_t_end": _fmt(None if exp.max_t_end is None else float(exp.max_t_end)),
            "wall_clock_cap": _fmt(None if exp.wall_clock_cap is None else float(exp.wall_clock_cap)),
        },
    }


def serialize_experiment(exp: TwinExperiment) -> str:
    """Canonical INI text; ``parse_experiment`` of it gives back an equal experiment."""
    blocks = []
    for section, items in experiment_sections(exp).items():
        lines = [f"[{section}]"] + [f"{key} = {value}" for key, value in items.items()]
        blocks.append("\n".join(lines))
    return "\n\n".join(blocks) + "\n"
