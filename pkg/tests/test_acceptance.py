"""
Desk-scale acceptance runs driven by the checked-in experiment files.

All of these take minutes; run them with ``pytest -m slow``.
"""

import os

import pytest

from nles.config_manager import load_experiment
from nles.harness import decay_rate_fit, nu_bar_sweep, run_twin

EXPERIMENTS = os.path.join(os.path.dirname(__file__), "..", "experiments")

pytestmark = pytest.mark.slow


def experiment(name, **overrides):
    return load_experiment(os.path.join(EXPERIMENTS, name), overrides)


class TestSelfSynchronization:
    def test_nse_twin_reaches_round_off(self):
        series = run_twin(experiment("self_twin_2d.ini"))
        assert series.l2_rel[-1] < 1e-9
        assert series.h1_rel[-1] < 1e-9
        assert decay_rate_fit(series) < -0.5

    def test_les_twin_reaches_round_off(self):
        series = run_twin(experiment("les_self_twin_2d.ini", **{"grid.n": "64"}))
        assert series.l2_rel[-1] < 1e-9
        assert series.h1_rel[-1] < 1e-9
        assert decay_rate_fit(series) < -0.5


class TestModelMismatch:
    def test_plateau_responds_linearly_to_nu_bar(self):
        """Plateaus over four decades of nu_bar scale like nu_bar^1, inside the nu_bar^(1/2) bound."""
        result = nu_bar_sweep(experiment("sweep_2d.ini"), [1e-8, 1e-7, 1e-6, 1e-5, 1e-4], jobs=5)
        assert all(p > 0 for p in result.plateaus)
        assert 0.8 < result.slope < 1.2

    def test_assimilation_beats_the_free_model(self):
        nudged = run_twin(experiment("mismatch_2d.ini"))
        free = run_twin(experiment("mismatch_2d.ini", **{"nudged.mu": "0"}))
        assert free.l2_rel[-1] > 0.5
        assert nudged.l2_rel[-1] < 0.1 * free.l2_rel[-1]
