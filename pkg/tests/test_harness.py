"""
Tests for twin experiments and the series analysis.

Synthetic series check the fits against known answers; small 16^2 twin runs
check the orchestration end to end.
"""

from dataclasses import replace

import numpy as np
import pytest

from nles.harness import (
    ErrorSeries,
    InsufficientDataError,
    TwinExperiment,
    decay_rate_fit,
    fit_power_law,
    nu_bar_sweep,
    plateau_estimate,
    run_twin,
)
from nles.interpolants import InterpolantSpec
from nles.solvers import ConfigInvariantError, SolverConfig
from nles.spectral import Grid


def synthetic(times, values):
    times = np.asarray(times, dtype=float)
    values = np.asarray(values, dtype=float)
    zeros = np.zeros_like(times)
    return ErrorSeries(times, values, values, zeros, zeros)


def small_experiment(grid=None, **kwargs):
    grid = grid or Grid(2, 16)
    reference = SolverConfig(grid=grid, model="nse", mu=0.0, nu=1e-2, t_end=0.3)
    nudged = SolverConfig(grid=grid, model="ladyzhenskaya", mu=30.0, nu=1e-2, t_end=0.3)
    defaults = dict(spinup_time=0.1, record_interval=0.05, seed=3)
    defaults.update(kwargs)
    return TwinExperiment(reference, nudged, **defaults)


class TestErrorSeries:
    def test_lengths_must_match(self):
        with pytest.raises(ValueError, match="entries"):
            ErrorSeries([0.0, 1.0], [1.0], [1.0, 1.0], [1.0, 1.0], [0.0, 0.0])

    def test_times_strictly_increasing(self):
        with pytest.raises(ValueError, match="strictly increasing"):
            synthetic([0.0, 1.0, 1.0], [1.0, 1.0, 1.0])


class TestTwinExperiment:
    def test_grids_must_match(self):
        exp = small_experiment()
        with pytest.raises(ConfigInvariantError, match="grid"):
            replace(exp, nudged_config=replace(exp.nudged_config, grid=Grid(2, 32)))

    def test_reference_is_not_nudged(self):
        exp = small_experiment()
        with pytest.raises(ConfigInvariantError, match="reference.mu"):
            replace(exp, reference_config=replace(exp.reference_config, mu=1.0))

    def test_unknown_start(self):
        with pytest.raises(ConfigInvariantError, match="nudged_start"):
            small_experiment(nudged_start="random")


class TestPlateauEstimate:
    def test_constant(self):
        assert plateau_estimate(synthetic(np.linspace(0, 4, 41), np.full(41, 0.3))) == pytest.approx(0.3)

    def test_full_window_is_plain_time_average(self):
        t = np.linspace(0.0, 1.0, 11)
        assert plateau_estimate(synthetic(t, t), tail_fraction=1.0) == pytest.approx(0.5)

    def test_decay_to_floor(self):
        t = np.linspace(0.0, 20.0, 401)
        estimate = plateau_estimate(synthetic(t, np.exp(-3.0 * t) + 1e-6))
        assert 0.5e-6 <= estimate <= 2e-6

    def test_empty_series(self):
        with pytest.raises(InsufficientDataError):
            plateau_estimate(synthetic([], []))

    def test_invalid_fraction(self):
        with pytest.raises(ValueError, match="tail_fraction"):
            plateau_estimate(synthetic([0.0, 1.0], [1.0, 1.0]), tail_fraction=0.0)


class TestDecayRateFit:
    def test_exact_exponential(self):
        t = np.linspace(0.0, 5.0, 51)
        assert decay_rate_fit(synthetic(t, np.exp(-3.0 * t))) == pytest.approx(-3.0, abs=1e-6)

    def test_with_floor(self):
        t = np.linspace(0.0, 10.0, 201)
        rate = decay_rate_fit(synthetic(t, np.exp(-3.0 * t) + 1e-6))
        assert rate == pytest.approx(-3.0, rel=0.05)

    def test_explicit_window(self):
        t = np.linspace(0.0, 5.0, 51)
        assert decay_rate_fit(synthetic(t, 2.0 * np.exp(-1.5 * t)), window=(1.0, 2.0)) == pytest.approx(-1.5)

    def test_flat_series(self):
        with pytest.raises(InsufficientDataError, match="no decaying window"):
            decay_rate_fit(synthetic(np.linspace(0, 1, 20), np.ones(20)))

    def test_too_few_points_in_window(self):
        t = np.linspace(0.0, 5.0, 51)
        with pytest.raises(InsufficientDataError, match="too few points"):
            decay_rate_fit(synthetic(t, np.exp(-t)), window=(0.0, 0.3))


class TestPowerLaw:
    def test_square_root_law(self):
        nu_bar = np.array([1e-6, 1e-5, 1e-4, 1e-3])
        assert fit_power_law(nu_bar, 7.0 * np.sqrt(nu_bar)) == pytest.approx(0.5, abs=1e-12)

    def test_degenerate(self):
        with pytest.raises(InsufficientDataError, match="degenerate fit"):
            fit_power_law([1e-4, 1e-4, 1e-4], [1.0, 2.0, 3.0])


class TestSweepValidation:
    def test_needs_three_values(self):
        with pytest.raises(ValueError, match="need ≥ 3 values"):
            nu_bar_sweep(small_experiment(), [1e-4])

    def test_equal_values_are_degenerate(self):
        with pytest.raises(InsufficientDataError, match="degenerate fit"):
            nu_bar_sweep(small_experiment(), [1e-4, 1e-4, 1e-4])

    def test_span_of_two_decades(self):
        with pytest.raises(ValueError, match="2 decades"):
            nu_bar_sweep(small_experiment(), [1e-4, 2e-4, 5e-4])


class TestRunTwin:
    def test_records_start_and_end_when_interval_exceeds_run(self):
        series = run_twin(small_experiment(record_interval=10.0))
        assert len(series) == 2
        assert series.times[0] == 0.0
        assert series.times[-1] == pytest.approx(0.3)
        assert series.l2_rel[0] == pytest.approx(1.0)

    def test_reproducible(self):
        a = run_twin(small_experiment())
        b = run_twin(small_experiment())
        for name in ("times", "l2_abs", "l2_rel", "h1_rel", "energy_residuals"):
            np.testing.assert_array_equal(getattr(a, name), getattr(b, name))

    def test_metadata(self):
        series = run_twin(small_experiment())
        meta = series.metadata
        assert meta["nudged"]["model"] == "ladyzhenskaya"
        assert meta["reference"]["mu"] == 0.0
        assert meta["seed"] == 3
        assert "code_version" in meta
        assert meta["max_vorticity_error"] >= 0.0
        assert isinstance(meta["events"], list)

    def test_self_twin_stays_at_round_off(self):
        exp = small_experiment(nudged_start="reference")
        exp = replace(exp, nudged_config=replace(exp.reference_config, mu=30.0))
        series = run_twin(exp)
        assert np.all(series.l2_rel < 1e-13)

    def test_les_self_twin_stays_at_round_off(self):
        exp = small_experiment(nudged_start="reference")
        les = replace(exp.nudged_config, mu=0.0, nu_bar=1e-3, interpolant=InterpolantSpec(h=0.25))
        exp = replace(exp, reference_config=les, nudged_config=replace(les, mu=30.0))
        series = run_twin(exp)
        assert np.all(series.l2_rel < 1e-12)

    def test_nudging_synchronizes(self):
        """Every active mode of 16^2 lies inside |k| < 9, so nudged NSE converges at rate ~mu."""
        exp = small_experiment()
        nudged = replace(exp.reference_config, mu=30.0, t_end=2.0)
        exp = replace(exp, nudged_config=nudged, reference_config=replace(exp.reference_config, t_end=2.0))
        series = run_twin(exp)
        assert series.l2_rel[-1] < 1e-6
        assert decay_rate_fit(series) < -5.0

    def test_without_nudging_the_error_stays_large(self):
        exp = small_experiment()
        exp = replace(exp, nudged_config=replace(exp.nudged_config, mu=0.0))
        series = run_twin(exp)
        assert series.l2_rel[-1] > 0.5

    def test_volume_average_observations(self):
        exp = small_experiment()
        volume = InterpolantSpec("volume_average", 0.125)
        nudged = replace(exp.reference_config, mu=5.0, interpolant=volume)
        series = run_twin(replace(exp, nudged_config=nudged))
        assert series.l2_rel[-1] < series.l2_rel[0]

    def test_extension_respects_max_t_end(self):
        series = run_twin(small_experiment(max_t_end=0.4))
        assert series.metadata["t_end"] <= 0.4 + 1e-12
        assert series.times[-1] == pytest.approx(series.metadata["t_end"])
