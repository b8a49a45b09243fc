# =============================================================================
# HARNESS - Twin experiments, error metrics and the nu_bar sweep
# =============================================================================
"""
Twin-experiment orchestration.

A twin experiment spins up a reference ("truth") run from a random isotropic
field, then steps the reference and the nudged model in lockstep from a
common time origin, feeding I_h(u^{n+1}) to each nudged step and recording
the difference at a fixed simulated-time interval.

Both runs share one step sequence: dt = min of the two CFL steps, so a
nudged model identical to the reference reproduces it to round-off.
"""

from __future__ import annotations

import time as wallclock
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.integrate import trapezoid

from nles import __version__, logger
from nles.config_utils import set_fft_workers
from nles.interpolants import apply
from nles.monitoring import RunMonitor
from nles.solvers import (
    ConfigInvariantError,
    SimState,
    SimulationDivergedError,
    SolverConfig,
    advance,
    check_finite,
    compute_dt,
    describe,
    energy_balance_residual,
    log_start,
    random_solenoidal_field,
    report_step,
    step,
)
from nles.spectral import VectorField, h1_seminorm, l2_norm, vorticity_magnitude


# =============================================================================
# CONSTANTS
# =============================================================================

NUDGED_STARTS = ("zero", "reference")

# Error level below which the nudged run counts as synchronized
SYNC_LEVEL = 1e-9

# Tail slope of log(l2_abs) below which a run counts as settled on its plateau
PLATEAU_SLOPE = 0.01


class InsufficientDataError(ValueError):
    """Raised when a fit has too few usable points or a degenerate design."""


# =============================================================================
# EXPERIMENT & SERIES TYPES
# =============================================================================


@dataclass(frozen=True)
class TwinExperiment:
    """Reference + nudged configuration pair with harness settings.

    ``nudged_config.mu = 0`` is accepted and runs the no-assimilation baseline.
    """

    reference_config: SolverConfig
    nudged_config: SolverConfig
    spinup_time: float = 10.0
    record_interval: float = 0.1
    seed: int = 0
    initial_wavenumber: float = 3.0
    initial_energy: float = 0.5
    nudged_start: str = "zero"
    tail_fraction: float = 0.25
    max_t_end: Optional[float] = None
    wall_clock_cap: Optional[float] = None

    def __post_init__(self) -> None:
        if self.reference_config.grid != self.nudged_config.grid:
            raise ConfigInvariantError("grid", "must be shared by the reference and nudged runs")
        checks = [
            ("reference.mu", self.reference_config.mu == 0, "must be 0 (the reference run is not nudged)"),
            ("spinup_time", self.spinup_time >= 0, "must be >= 0"),
            ("record_interval", self.record_interval > 0, "must be > 0"),
            ("seed", self.seed >= 0, "must be >= 0"),
            ("initial_wavenumber", self.initial_wavenumber > 0, "must be > 0"),
            ("initial_energy", self.initial_energy > 0, "must be > 0"),
            ("nudged_start", self.nudged_start in NUDGED_STARTS, f"must be one of {NUDGED_STARTS}"),
            ("tail_fraction", 0 < self.tail_fraction <= 1, "must be in (0,1]"),
            (
                "max_t_end",
                self.max_t_end is None or self.max_t_end >= self.nudged_config.t_end,
                "must be >= nudged t_end",
            ),
            ("wall_clock_cap", self.wall_clock_cap is None or self.wall_clock_cap > 0, "must be > 0"),
        ]
        for key, valid, constraint in checks:
            if not valid:
                raise ConfigInvariantError(key, constraint)

    @property
    def grid(self):
        return self.nudged_config.grid


@dataclass(eq=False)
class ErrorSeries:
    """Recorded reference-vs-nudged errors of one twin run."""

    times: np.ndarray
    l2_abs: np.ndarray
    l2_rel: np.ndarray
    h1_rel: np.ndarray
    energy_residuals: np.ndarray
    metadata: Dict[str, Any] = field(default_factory=dict)

    def __post_init__(self) -> None:
        for name in ("times", "l2_abs", "l2_rel", "h1_rel", "energy_residuals"):
            setattr(self, name, np.asarray(getattr(self, name), dtype=float))
        n = self.times.size
        for name in ("l2_abs", "l2_rel", "h1_rel", "energy_residuals"):
            if getattr(self, name).size != n:
                raise ValueError(f"{name} has {getattr(self, name).size} entries, times has {n}")
        if n > 1 and np.any(np.diff(self.times) <= 0):
            raise ValueError("times must be strictly increasing")

    def __len__(self) -> int:
        return int(self.times.size)

    @classmethod
    def from_records(cls, records: Sequence[Tuple[float, float, float, float, float]], metadata=None) -> "ErrorSeries":
        arr = np.asarray(records, dtype=float).reshape(-1, 5)
        return cls(arr[:, 0], arr[:, 1], arr[:, 2], arr[:, 3], arr[:, 4], dict(metadata or {}))


@dataclass(frozen=True, eq=False)
class SweepResult:
    nu_bar_values: np.ndarray
    plateaus: np.ndarray
    slope: float
    series: Tuple[ErrorSeries, ...]


# =============================================================================
# ERROR METRICS
# =============================================================================


def twin_errors(u: VectorField, v: VectorField) -> Tuple[float, float, float]:
    """(||u - v||, ||u - v|| / ||u||, ||grad(u - v)|| / ||grad u||)."""
    w = u - v
    abs_err = l2_norm(w)
    ref = l2_norm(u)
    ref_h1 = h1_seminorm(u)
    rel = abs_err / ref if ref > 0 else float("nan")
    h1_rel = h1_seminorm(w) / ref_h1 if ref_h1 > 0 else float("nan")
    return abs_err, rel, h1_rel


def _config_summary(config: SolverConfig) -> Dict[str, Any]:
    return {
        "model": config.model,
        "dim": config.grid.dim,
        "n": config.grid.n,
        "nu": config.nu,
        "nu_bar": config.effective_nu_bar,
        "p": config.p,
        "mu": config.mu,
        "interpolant": config.interpolant.kind,
        "h": config.interpolant.h,
        "forcing": config.forcing.kind,
        "cfl": config.cfl,
        "t_end": config.t_end,
    }


def _tail_slope(times: Sequence[float], values: Sequence[float], tail_fraction: float) -> float:
    t = np.asarray(times, dtype=float)
    y = np.asarray(values, dtype=float)
    start = t[-1] - tail_fraction * (t[-1] - t[0])
    mask = (t >= start) & (y > 0)
    if np.count_nonzero(mask) < 2:
        return 0.0
    return float(np.polyfit(t[mask], np.log(y[mask]), 1)[0])


# =============================================================================
# TWIN RUN
# =============================================================================


def spin_up(exp: TwinExperiment, monitor: Optional[RunMonitor] = None) -> SimState:
    """Random isotropic start advanced to ``spinup_time``, re-based to t = 0."""
    monitor = monitor or RunMonitor("harness")
    grid = exp.grid
    rng = np.random.default_rng(exp.seed)
    u0 = random_solenoidal_field(grid, rng, exp.initial_wavenumber, exp.initial_energy)
    ref = advance(SimState(u0), exp.reference_config, exp.spinup_time, monitor=monitor, label="reference")
    return SimState(ref.v)


def run_twin(exp: TwinExperiment) -> ErrorSeries:
    """Spin up the reference, then step reference and nudged runs in lockstep."""
    monitor = RunMonitor("harness")
    ref_cfg, nud_cfg = exp.reference_config, exp.nudged_config
    log_start("reference", ref_cfg)
    log_start("nudged", nud_cfg)
    if not nud_cfg.nudging_enabled:
        logger.info("harness", "mu = 0: running the no-assimilation baseline")

    started = wallclock.monotonic()
    ref = spin_up(exp, monitor)
    if exp.nudged_start == "reference":
        nudged = SimState(ref.v)
    else:
        nudged = SimState(VectorField.zeros(exp.grid))

    records: List[Tuple[float, float, float, float, float]] = []

    def record(residual: float) -> None:
        abs_err, rel, h1_rel = twin_errors(ref.v, nudged.v)
        records.append((nudged.t, abs_err, rel, h1_rel, residual))
        monitor.observe(
            "sync",
            "synchronized" if rel < SYNC_LEVEL else "tracking",
            nudged.t,
            nudged.step_count,
            f"relative L2 error {rel:.3e}",
        )
        logger.debug("harness", f"t={nudged.t:.6g} l2_abs={abs_err:.3e} l2_rel={rel:.3e} h1_rel={h1_rel:.3e}")

    record(float("nan"))
    next_record = exp.record_interval
    residual = float("nan")
    t_end = nud_cfg.t_end
    extensions = 0

    while True:
        while nudged.t < t_end - 1e-12:
            dt = min(compute_dt(nudged, nud_cfg), compute_dt(ref, ref_cfg), t_end - nudged.t)
            ref_new = step(ref, ref_cfg, None, dt)
            report_step(monitor, ref_new, ref_cfg, "reference", ref)
            obs = apply(nud_cfg.interpolant, ref_new.v) if nud_cfg.nudging_enabled else None
            try:
                nudged_new = step(nudged, nud_cfg, obs, dt)
                report_step(monitor, nudged_new, nud_cfg, "nudged", nudged)
            except SimulationDivergedError as exc:
                logger.error("harness", f"aborting twin run: {exc}")
                raise
            residual = energy_balance_residual(nudged, nudged_new, nud_cfg, obs)
            ref, nudged = ref_new, nudged_new
            if nudged.t >= next_record - 1e-12:
                record(residual)
                while next_record <= nudged.t + 1e-12:
                    next_record += exp.record_interval

        if records[-1][0] < nudged.t:
            record(residual)

        if exp.max_t_end is None or t_end >= exp.max_t_end:
            break
        times = [r[0] for r in records]
        slope = _tail_slope(times, [r[1] for r in records], exp.tail_fraction)
        if abs(slope) <= PLATEAU_SLOPE:
            break
        if exp.wall_clock_cap is not None and wallclock.monotonic() - started >= exp.wall_clock_cap:
            logger.warn("harness", f"wall-clock cap reached with tail slope {slope:.3g}; not extending")
            break
        t_end = min(exp.max_t_end, 1.25 * t_end)
        extensions += 1
        logger.info("harness", f"tail slope {slope:.3g} still above {PLATEAU_SLOPE}; extending to t={t_end:.6g}")

    check_finite(ref, "reference")
    omega_err = vorticity_magnitude(ref.v - nudged.v)
    metadata = {
        "code_version": __version__,
        "reference": _config_summary(ref_cfg),
        "nudged": _config_summary(nud_cfg),
        "seed": exp.seed,
        "spinup_time": exp.spinup_time,
        "nudged_start": exp.nudged_start,
        "t_end": t_end,
        "extensions": extensions,
        "max_vorticity": float(np.max(vorticity_magnitude(ref.v))),
        "max_vorticity_error": float(np.max(omega_err)),
        "events": monitor.as_records(),
    }
    series = ErrorSeries.from_records(records, metadata)
    logger.ok(
        "harness",
        f"twin run finished at t={t_end:.6g}: l2_rel={series.l2_rel[-1]:.3e} h1_rel={series.h1_rel[-1]:.3e} "
        f"({describe(nud_cfg)})",
    )
    return series


# =============================================================================
# SERIES ANALYSIS
# =============================================================================


def plateau_estimate(series: ErrorSeries, tail_fraction: float = 0.25) -> float:
    """Time average of l2_abs over the final ``tail_fraction`` of the recorded window."""
    if len(series) == 0:
        raise InsufficientDataError("cannot estimate a plateau from an empty series")
    if not 0 < tail_fraction <= 1:
        raise ValueError(f"tail_fraction must be in (0,1], got {tail_fraction}")
    t, y = series.times, series.l2_abs
    start = t[-1] - tail_fraction * (t[-1] - t[0])
    mask = t >= start - 1e-12 * max(1.0, abs(start))
    tt, yy = t[mask], y[mask]
    if tt.size == 1 or tt[-1] == tt[0]:
        return float(np.mean(yy))
    return float(trapezoid(yy, tt) / (tt[-1] - tt[0]))


def decay_rate_fit(series: ErrorSeries, window: Optional[Tuple[float, float]] = None) -> float:
    """Least-squares slope of log(l2_abs) against t over the pre-plateau window.

    Without an explicit ``window`` the fit runs from the first record up to
    the first record within 10x of the plateau estimate.
    """
    t, y = series.times, series.l2_abs
    if window is not None:
        mask = (t >= window[0]) & (t <= window[1]) & (y > 0)
        if np.count_nonzero(mask) < 5:
            raise InsufficientDataError(f"too few points in window {window}: {np.count_nonzero(mask)} < 5")
    else:
        if len(series) == 0:
            raise InsufficientDataError("no decaying window: empty series")
        floor = plateau_estimate(series)
        above = y > 10.0 * floor
        stop = int(np.argmin(above)) if not np.all(above) else above.size
        mask = np.zeros(y.size, dtype=bool)
        mask[:stop] = True
        mask &= y > 0
        if np.count_nonzero(mask) < 5:
            raise InsufficientDataError(
                f"no decaying window: {np.count_nonzero(mask)} points above 10x the plateau, need 5"
            )
    slope = float(np.polyfit(t[mask], np.log(y[mask]), 1)[0])
    if slope >= 0:
        raise InsufficientDataError(f"no decaying window: fitted slope {slope:.3g} is not negative")
    return slope


def fit_power_law(x: Sequence[float], y: Sequence[float]) -> float:
    """Least-squares slope of log(y) against log(x)."""
    xs = np.asarray(x, dtype=float)
    ys = np.asarray(y, dtype=float)
    if xs.size != ys.size or xs.size < 2:
        raise InsufficientDataError("power-law fit needs at least two (x, y) pairs")
    if np.any(xs <= 0) or np.any(ys <= 0):
        raise ValueError("power-law fit needs positive values")
    if np.all(xs == xs[0]):
        raise InsufficientDataError("degenerate fit: all x values are equal")
    return float(np.polyfit(np.log(xs), np.log(ys), 1)[0])


# =============================================================================
# NU_BAR SWEEP
# =============================================================================


def _sweep_member(base: TwinExperiment, nu_bar: float) -> TwinExperiment:
    nudged = replace(base.nudged_config, nu_bar=float(nu_bar), model="ladyzhenskaya")
    return replace(base, nudged_config=nudged)


def nu_bar_sweep(base: TwinExperiment, nu_bar_values: Sequence[float], jobs: int = 1) -> SweepResult:
    """Run one twin per nu_bar and fit log(plateau) against log(nu_bar).

    The synchronization bound caps the plateau by C nu_bar^(1/2); small 2D
    sweeps respond close to linearly, a slope near 1.
    """
    values = [float(v) for v in nu_bar_values]
    if len(values) < 3:
        raise ValueError(f"need ≥ 3 values, got {len(values)}")
    if all(v == values[0] for v in values):
        raise InsufficientDataError("degenerate fit: all nu_bar values are equal")
    if min(values) <= 0:
        raise ValueError("nu_bar values must be > 0")
    if max(values) / min(values) < 100.0:
        raise ValueError("nu_bar values must span at least 2 decades")

    members = [_sweep_member(base, v) for v in values]
    logger.info("harness", f"nu_bar sweep over {len(values)} values with {jobs} job(s)")
    try:
        if jobs > 1:
            # one FFT thread per member process
            with ProcessPoolExecutor(max_workers=jobs, initializer=set_fft_workers, initargs=(1,)) as pool:
                series = list(pool.map(run_twin, members))
        else:
            series = [run_twin(m) for m in members]
    except SimulationDivergedError as exc:
        raise SimulationDivergedError(f"nu_bar sweep member diverged: {exc}") from exc

    plateaus = np.array([plateau_estimate(s, base.tail_fraction) for s in series])
    slope = fit_power_law(values, plateaus)
    logger.ok("harness", f"nu_bar sweep slope = {slope:.4f} (bound exponent 0.5)")
    return SweepResult(np.asarray(values), plateaus, slope, tuple(series))
