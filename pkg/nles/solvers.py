# =============================================================================
# SOLVERS - Time integration of the reference NSE and the nudged LES model
# =============================================================================
"""
Linearly implicit backward-Euler integration of

    dv/dt + P div(v (x) v) - nu Lap v - P div(nu_bar |grad v|^(p-2) grad v)
          = P f + mu P (I_h u - I_h v)

on the periodic unit box, with pressure removed by the Leray projection P.

One step from v^n to v^{n+1}:
- advection is explicit at v^n;
- viscosity, the constant part nu_bar * max(a^n) of the LES term and (for
  Fourier truncation) the nudging term are implicit and diagonal per mode;
- the remainder div(nu_bar (a^n - max a^n) grad v) is iterated with Picard
  sweeps, a^n = |grad v^n|^(p-2) being lagged at the old step;
- the sweeps solve the un-nudged system and the nudging term is applied to
  their result, so a nudged step started on the reference state reproduces
  the reference step for any sweep count;
- volume-average nudging, which is not diagonal, is explicit and limits
  dt <= 1/(2 mu).

The step size follows a CFL rule clamped to [dt_min, dt_max].
"""

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, List, Optional, Tuple

import numpy as np

from nles import logger
from nles.interpolants import InterpolantSpec, apply
from nles.les_terms import (
    ForcingSpec,
    advection,
    default_forcing,
    lagged_les_coefficient,
    make_forcing,
    variable_viscosity_divergence,
)
from nles.monitoring import RunMonitor
from nles.spectral import (
    Grid,
    GridMismatchError,
    VectorField,
    dealias_23,
    frobenius_gradient,
    h1_seminorm,
    inner,
    l2_norm,
    leray_project,
    to_physical,
    to_spectral,
)


# =============================================================================
# CONSTANTS
# =============================================================================

MODELS = ("nse", "ladyzhenskaya")

# Speed floor in the CFL rule so a quiescent state gets dt_max
EPS_VEL = 1e-8


class ConfigInvariantError(ValueError):
    """A configuration value violates its constraint; ``key`` names the field."""

    def __init__(self, key: str, constraint: str) -> None:
        self.key = key
        self.constraint = constraint
        super().__init__(f"{key} {constraint}")


class SimulationDivergedError(RuntimeError):
    """Raised when a state stops being finite."""


# =============================================================================
# CONFIGURATION & STATE
# =============================================================================


@dataclass(frozen=True)
class SolverConfig:
    """Physical and numerical parameters of one model run.

    ``nu_bar = None`` derives the turbulence viscosity from
    nu_bar = (c_s * delta)^2 with delta = 1/n.
    """

    grid: Grid
    nu: float = 2.75e-3
    nu_bar: Optional[float] = None
    c_s: float = 0.17
    p: float = 3.0
    mu: float = 30.0
    interpolant: InterpolantSpec = field(default_factory=InterpolantSpec)
    forcing: Optional[ForcingSpec] = None
    cfl: float = 0.5
    dt_max: float = 1e-2
    dt_min: float = 1e-6
    t_end: float = 20.0
    model: str = "ladyzhenskaya"
    picard_sweeps: int = 1
    picard_tol: float = 1e-8

    def __post_init__(self) -> None:
        if self.forcing is None:
            object.__setattr__(self, "forcing", default_forcing(self.grid.dim))
        checks = [
            ("model", self.model in MODELS, f"must be one of {MODELS}"),
            ("nu", self.nu > 0, "must be > 0"),
            ("nu_bar", self.nu_bar is None or self.nu_bar >= 0, "must be >= 0"),
            ("c_s", self.c_s >= 0, "must be >= 0"),
            ("p", self.p >= 2, "must be >= 2"),
            ("mu", self.mu >= 0, "must be >= 0"),
            ("cfl", 0 < self.cfl <= 1, "must be in (0,1]"),
            ("dt_min", self.dt_min > 0, "must be > 0"),
            ("dt_max", self.dt_min <= self.dt_max, "must be >= dt_min"),
            ("t_end", self.t_end >= 0, "must be >= 0"),
            ("picard_sweeps", self.picard_sweeps >= 0, "must be >= 0"),
            ("picard_tol", self.picard_tol > 0, "must be > 0"),
        ]
        for key, valid, constraint in checks:
            if not valid:
                raise ConfigInvariantError(key, constraint)
        try:
            self.interpolant.validate_for(self.grid)
        except ValueError as exc:
            raise ConfigInvariantError("h", str(exc)) from exc

    @property
    def effective_nu_bar(self) -> float:
        if self.model == "nse":
            return 0.0
        if self.nu_bar is not None:
            return float(self.nu_bar)
        return (self.c_s * self.grid.dx) ** 2

    @property
    def nudging_enabled(self) -> bool:
        return self.mu > 0


@dataclass(frozen=True, eq=False)
class SimState:
    """Velocity with its time, step count and the last step size taken."""

    v: VectorField
    t: float = 0.0
    step_count: int = 0
    last_dt: float = 0.0
    picard_change: float = 0.0


@lru_cache(maxsize=16)
def _projected_forcing(spec: ForcingSpec, grid: Grid) -> VectorField:
    forcing = dealias_23(make_forcing(spec, grid))
    forcing.coeffs.setflags(write=False)
    return forcing


@lru_cache(maxsize=16)
def _nudging_mask(spec: InterpolantSpec, grid: Grid) -> np.ndarray:
    mask = spec.mask(grid).astype(float)
    mask.setflags(write=False)
    return mask


def check_finite(state: SimState, label: str = "state", previous: Optional[SimState] = None) -> None:
    if not np.all(np.isfinite(state.v.coeffs)):
        last_norm = f", last finite norm={l2_norm(previous.v):.3e}" if previous is not None else ""
        raise SimulationDivergedError(
            f"{label} became non-finite at t={state.t:.6g} after {state.step_count} steps "
            f"(last dt={state.last_dt:.3e}{last_norm})"
        )


# =============================================================================
# TIME STEP SELECTION
# =============================================================================


def max_speed(v: VectorField) -> float:
    u = to_physical(v)
    return float(np.sqrt(np.max(np.sum(u * u, axis=0))))


def compute_dt(state: SimState, config: SolverConfig) -> float:
    """dt = clamp(cfl * dx / max(|v|_inf, eps), dt_min, dt_max)."""
    speed = max(max_speed(state.v), EPS_VEL)
    dt = config.cfl * config.grid.dx / speed
    dt = min(max(dt, config.dt_min), config.dt_max)
    if config.nudging_enabled and not config.interpolant.is_diagonal:
        dt = min(dt, 1.0 / (2.0 * config.mu))
    return dt


# =============================================================================
# STEP
# =============================================================================


def step(
    state: SimState,
    config: SolverConfig,
    observation: Optional[VectorField] = None,
    dt: Optional[float] = None,
) -> SimState:
    """Advance one linearly implicit backward-Euler step.

    Viscosity and the constant part nu_bar * max(a) of the lagged LES operator
    are implicit; the variable remainder goes through ``picard_sweeps`` sweeps.
    Nudging is folded in after the sweeps: implicitly on the observed modes for
    Fourier truncation, explicitly for volume averages. When the state equals
    the reference state and the observation is I_h of the reference step, the
    result is the reference step.

    Args:
        state: current state; its velocity must be solenoidal.
        config: model parameters.
        observation: I_h(u) at the new time level, required when mu > 0.
        dt: step size; defaults to ``compute_dt(state, config)``.
    """
    grid = config.grid
    v0 = state.v
    if v0.grid != grid:
        raise GridMismatchError(f"state grid {v0.grid} does not match config grid {grid}")
    if dt is None:
        dt = compute_dt(state, config)
    if not dt > 0:
        raise ValueError(f"dt must be > 0, got {dt}")
    if config.nudging_enabled:
        if observation is None:
            raise ValueError("an observation is required when mu > 0")
        if observation.grid != grid:
            raise GridMismatchError(f"observation grid {observation.grid} does not match {grid}")

    k2 = grid.kappa_squared
    nonlinear = leray_project(advection(v0))
    forcing = _projected_forcing(config.forcing, grid)
    rhs = leray_project(VectorField(grid, v0.coeffs + dt * (forcing.coeffs - nonlinear.coeffs))).coeffs
    diag = 1.0 + dt * config.nu * k2

    # The Picard sweeps never see the nudging terms, so their iterates match
    # the un-nudged step from the same state for every sweep count.
    nu_bar = config.effective_nu_bar
    change = 0.0
    if nu_bar > 0:
        a = lagged_les_coefficient(v0, config.p)
        a_bar = float(np.max(a))
        diag = diag + dt * nu_bar * a_bar * k2
        remainder = a - a_bar
        v_new = rhs / diag
        implicit_rhs = rhs
        for _ in range(config.picard_sweeps):
            corr = variable_viscosity_divergence(VectorField(grid, v_new), remainder, nu_bar)
            implicit_rhs = rhs + dt * leray_project(corr).coeffs
            nxt = implicit_rhs / diag
            scale = max(float(np.sqrt(np.sum(np.abs(nxt) ** 2 * grid.weights))), 1e-300)
            change = float(np.sqrt(np.sum(np.abs(nxt - v_new) ** 2 * grid.weights))) / scale
            v_new = nxt
            if change < config.picard_tol:
                break
    else:
        implicit_rhs = rhs
        v_new = rhs / diag

    if config.nudging_enabled:
        if config.interpolant.is_diagonal:
            nudge_diag = diag + dt * config.mu * _nudging_mask(config.interpolant, grid)
            v_new = (implicit_rhs + dt * config.mu * observation.coeffs) / nudge_diag
        else:
            innovation = VectorField(grid, observation.coeffs - apply(config.interpolant, v0).coeffs)
            v_new = (implicit_rhs + dt * config.mu * leray_project(innovation).coeffs) / diag

    v_new = dealias_23(leray_project(VectorField(grid, v_new)))
    coeffs = v_new.coeffs.copy()
    coeffs[(Ellipsis,) + (0,) * grid.dim] = 0.0
    return SimState(
        v=VectorField(grid, coeffs, solenoidal=True),
        t=state.t + dt,
        step_count=state.step_count + 1,
        last_dt=dt,
        picard_change=change,
    )


def report_step(
    monitor: Optional[RunMonitor],
    state: SimState,
    config: SolverConfig,
    label: str,
    previous: Optional[SimState] = None,
) -> None:
    """Finite check plus Picard convergence status, reported on transitions."""
    check_finite(state, label, previous)
    if monitor is None or config.effective_nu_bar == 0.0:
        return
    converged = state.picard_change < config.picard_tol
    monitor.observe(
        f"{label}.picard",
        "converged" if converged else "unconverged",
        state.t,
        state.step_count,
        f"successive-iterate change {state.picard_change:.2e}",
    )


def advance(
    state: SimState,
    config: SolverConfig,
    t_target: float,
    observation_fn: Optional[Callable[[float], VectorField]] = None,
    monitor: Optional[RunMonitor] = None,
    label: str = "run",
    on_step: Optional[Callable[[SimState], None]] = None,
) -> SimState:
    """Step ``state`` with CFL-chosen steps until ``t_target`` (last step clipped)."""
    if config.nudging_enabled and observation_fn is None:
        raise ValueError("advance with mu > 0 needs an observation source")
    while state.t < t_target - 1e-12:
        dt = min(compute_dt(state, config), t_target - state.t)
        obs = observation_fn(state.t + dt) if config.nudging_enabled else None
        new_state = step(state, config, obs, dt)
        report_step(monitor, new_state, config, label, state)
        state = new_state
        if on_step is not None:
            on_step(state)
    return state


# =============================================================================
# INITIAL CONDITIONS
# =============================================================================


def random_solenoidal_field(
    grid: Grid, rng: np.random.Generator, k_peak: float = 3.0, energy: float = 0.5
) -> VectorField:
    """Random isotropic, solenoidal, mean-free field with energy 1/2 ||v||^2 = ``energy``."""
    noise = to_spectral(rng.standard_normal((grid.dim,) + grid.physical_shape), grid)
    ratio2 = grid.k_squared / float(k_peak) ** 2
    shape = ratio2 * np.exp(-ratio2)
    v = dealias_23(leray_project(noise.with_coeffs(noise.coeffs * shape)))
    coeffs = v.coeffs.copy()
    coeffs[(Ellipsis,) + (0,) * grid.dim] = 0.0
    current = 0.5 * l2_norm(VectorField(grid, coeffs)) ** 2
    if current > 0:
        coeffs *= np.sqrt(energy / current)
    return VectorField(grid, coeffs, solenoidal=True)


# =============================================================================
# DIAGNOSTICS
# =============================================================================


def grashof(f: VectorField, nu: float, lambda1: float) -> float:
    """G = ||f|| / (nu^2 lambda1)."""
    if nu <= 0:
        raise ValueError(f"nu must be > 0, got {nu}")
    return l2_norm(f) / (nu**2 * lambda1)


@dataclass(frozen=True)
class ConditionCheck:
    name: str
    description: str
    lhs: float
    rhs: float
    status: str  # ok | warn | unknown | not_applicable


@dataclass(frozen=True)
class DAConditionReport:
    checks: Tuple[ConditionCheck, ...]
    grashof: float
    c0: Optional[float]

    @property
    def status(self) -> str:
        states = {c.status for c in self.checks}
        if states <= {"not_applicable"}:
            return "not_applicable"
        if "warn" in states:
            return "warn"
        if "unknown" in states:
            return "unknown"
        return "ok"

    def get(self, name: str) -> ConditionCheck:
        for check in self.checks:
            if check.name == name:
                return check
        raise KeyError(name)

    def lines(self) -> List[str]:
        out = [f"Grashof number G = {self.grashof:.6g}; c0 = {self.c0 if self.c0 is not None else 'unknown'}"]
        for c in self.checks:
            out.append(f"{c.status.upper():>14}  {c.name}: {c.description} (lhs={c.lhs:.6g}, rhs={c.rhs:.6g})")
        out.append(f"overall: {self.status.upper()}")
        return out


def _check(name: str, description: str, lhs: float, rhs: float, known: bool = True) -> ConditionCheck:
    if not known:
        return ConditionCheck(name, description, lhs, rhs, "unknown")
    return ConditionCheck(name, description, lhs, rhs, "ok" if lhs <= rhs else "warn")


def validate_da_conditions(config: SolverConfig, G: float, c0: Optional[float] = None) -> DAConditionReport:
    """Classify the nudging parameters against the synchronization thresholds.

    Violations are warnings: synchronization is routinely observed outside
    these sufficient conditions.
    """
    if G < 0:
        raise ValueError("G must be >= 0")
    c0 = config.interpolant.c0 if c0 is None else c0
    grid = config.grid
    nu, mu, h = config.nu, config.mu, config.interpolant.h

    if not config.nudging_enabled:
        na = [
            ConditionCheck("mu_threshold", "mu >= 8 nu lambda1 G^2 (nudging disabled)", mu, 0.0, "not_applicable"),
            ConditionCheck("h_synchronization", "2 mu c0 h^2 <= nu (nudging disabled)", 0.0, nu, "not_applicable"),
            ConditionCheck("h_well_posedness", "c0 mu h^2 <= nu (nudging disabled)", 0.0, nu, "not_applicable"),
        ]
        return DAConditionReport(tuple(na), G, c0)

    threshold = 8.0 * nu * grid.lambda1 * G**2
    known = c0 is not None
    c0_value = c0 if known else float("nan")
    checks = [
        ConditionCheck(
            "mu_threshold",
            "mu >= 8 nu lambda1 G^2",
            mu,
            threshold,
            "ok" if mu >= threshold else "warn",
        ),
        _check("h_synchronization", "2 mu c0 h^2 <= nu", 2.0 * mu * c0_value * h**2, nu, known),
        _check("h_well_posedness", "c0 mu h^2 <= nu", c0_value * mu * h**2, nu, known),
    ]
    if config.model == "ladyzhenskaya":
        if grid.dim == 3:
            checks.append(ConditionCheck("p_regime", "dim = 3 is beyond the proved regime", config.p, 2.5, "warn"))
        else:
            checks.append(
                ConditionCheck("p_regime", "p >= 5/2 in 2D", config.p, 2.5, "ok" if config.p >= 2.5 else "warn")
            )
    return DAConditionReport(tuple(checks), G, c0)


def energy_balance_residual(
    state_before: SimState,
    state_after: SimState,
    config: SolverConfig,
    observation: Optional[VectorField] = None,
) -> float:
    """Defect of the discrete energy identity over one step, relative to ||v^{n+1}||^2.

    LHS = (||v1||^2 - ||v0||^2) / (2 dt) + nu ||grad v1||^2 + nu_bar (a^n grad v1, grad v1)
    RHS = (P f, v1) + mu (I_h u, v1) - mu (I_h v1, v1)
    """
    dt = state_after.t - state_before.t
    if not dt > 0:
        raise ValueError("states must be consecutive with increasing time")
    v0, v1 = state_before.v, state_after.v
    norm1 = l2_norm(v1) ** 2
    lhs = (norm1 - l2_norm(v0) ** 2) / (2.0 * dt) + config.nu * h1_seminorm(v1) ** 2
    nu_bar = config.effective_nu_bar
    if nu_bar > 0:
        a = lagged_les_coefficient(v0, config.p)
        lhs += nu_bar * float(np.mean(a * frobenius_gradient(v1) ** 2))

    rhs = inner(_projected_forcing(config.forcing, config.grid), v1)
    if config.nudging_enabled:
        if observation is None:
            raise ValueError("an observation is required when mu > 0")
        rhs += config.mu * (inner(observation, v1) - inner(apply(config.interpolant, v1), v1))

    defect = abs(lhs - rhs)
    if norm1 == 0.0:
        return defect
    return defect / norm1


def describe(config: SolverConfig) -> str:
    return (
        f"model={config.model} n={config.grid.n} dim={config.grid.dim} nu={config.nu:.4g} "
        f"nu_bar={config.effective_nu_bar:.4g} p={config.p:g} mu={config.mu:g} "
        f"I_h={config.interpolant.kind}(h={config.interpolant.h:.4g})"
    )


def log_start(label: str, config: SolverConfig) -> None:
    logger.info("solvers", f"{label}: {describe(config)}")
