"""Shared fixtures: small grids, seeded generators and an isolated output directory."""

import numpy as np
import pytest

from nles.spectral import Grid


@pytest.fixture
def grid2d():
    return Grid(2, 16)


@pytest.fixture
def grid3d():
    return Grid(3, 8)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture(autouse=True)
def _isolated_output(tmp_path, monkeypatch):
    monkeypatch.setenv("NLES_OUTPUT_DIR", str(tmp_path / "runs"))
    monkeypatch.delenv("NLES_THREADS", raising=False)
