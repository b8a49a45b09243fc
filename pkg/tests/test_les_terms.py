"""Tests for advection, the Ladyzhenskaya stress and the body forcing."""

import numpy as np
import pytest

from nles.les_terms import (
    ForcingSpec,
    NonSolenoidalError,
    advection,
    lagged_les_coefficient,
    ladyzhenskaya_divergence,
    make_forcing,
)
from nles.spectral import (
    Grid,
    VectorField,
    dealias_23,
    inner,
    is_solenoidal,
    l2_norm,
    leray_project,
    lp_gradient_norm,
    to_spectral,
)
from tests.helpers import shear_field, solenoidal_random


def taylor_green_2d(grid):
    x, y = (2.0 * np.pi * c for c in grid.coordinates())
    v = to_spectral(np.stack([np.sin(x) * np.cos(y), -np.cos(x) * np.sin(y)]), grid)
    return VectorField(grid, v.coeffs, solenoidal=True)


def _embedding(coarse, fine):
    """Index arrays placing the coarse rfft layout inside the fine one."""
    half = coarse.n // 2
    full = np.r_[0:half, fine.n - half : fine.n]
    return np.ix_(range(coarse.dim), *([full] * (coarse.dim - 1)), np.arange(half + 1))


def refine(v, fine):
    coeffs = np.zeros((fine.dim,) + fine.spectral_shape, dtype=complex)
    coeffs[_embedding(v.grid, fine)] = v.coeffs
    return VectorField(fine, coeffs, solenoidal=v.solenoidal)


def coarsen(v, coarse):
    return v.coeffs[_embedding(coarse, v.grid)]


class TestAdvection:
    def test_taylor_green_advection_is_a_gradient(self, grid2d):
        v = taylor_green_2d(grid2d)
        nonlinear = advection(v)
        assert l2_norm(nonlinear) > 1.0
        assert l2_norm(leray_project(nonlinear)) < 1e-12

    def test_shear_flow_has_no_advection(self, grid3d):
        assert l2_norm(advection(shear_field(grid3d, (1.0, 0.5)))) < 1e-13

    def test_rejects_divergent_input(self, grid2d):
        x = grid2d.coordinates()[0]
        v = to_spectral(np.stack([np.sin(2.0 * np.pi * x), np.zeros_like(x)]), grid2d)
        with pytest.raises(NonSolenoidalError, match="solenoidal"):
            advection(v)

    def test_energy_neutral(self, grid3d, rng):
        """(div(v v), v) vanishes for dealiased solenoidal v."""
        v = dealias_23(solenoidal_random(grid3d, rng))
        assert abs(inner(advection(v), v)) < 1e-12 * l2_norm(v) ** 3


class TestLadyzhenskaya:
    def test_p2_is_scaled_laplacian(self, grid3d, rng):
        v = solenoidal_random(grid3d, rng)
        nu_bar = 0.3
        expected = dealias_23(v.with_coeffs(-grid3d.kappa_squared * v.coeffs)) * nu_bar
        out = ladyzhenskaya_divergence(v, 2.0, nu_bar)
        np.testing.assert_allclose(out.coeffs, expected.coeffs, atol=1e-11)

    def test_dissipation_equals_lp_norm(self, grid2d, rng):
        """(div(nu_bar |grad v|^(p-2) grad v), v) = -nu_bar ||grad v||_p^p."""
        v = dealias_23(solenoidal_random(grid2d, rng))
        nu_bar = 1e-2
        for p in (2.0, 3.0, 4.5):
            value = inner(ladyzhenskaya_divergence(v, p, nu_bar), v)
            assert value <= 0.0
            assert np.isclose(value, -nu_bar * lp_gradient_norm(v, p) ** p, rtol=1e-10)

    def test_zero_nu_bar_gives_zero(self, grid2d, rng):
        out = ladyzhenskaya_divergence(solenoidal_random(grid2d, rng), 3.0, 0.0)
        assert np.all(out.coeffs == 0)

    def test_coefficient_at_p2_is_one(self, grid2d, rng):
        a = lagged_les_coefficient(solenoidal_random(grid2d, rng), 2.0)
        assert np.all(a == 1.0)

    def test_coefficient_of_shear_at_p3(self, grid2d):
        y = grid2d.coordinates()[1]
        a = lagged_les_coefficient(shear_field(grid2d), 3.0)
        np.testing.assert_allclose(a, 2.0 * np.pi * np.abs(np.cos(2.0 * np.pi * y)), atol=1e-12)

    def test_p3_matches_refined_grid(self, grid3d):
        """(sin 2 pi z, cos 2 pi z, 0) has constant |grad v|, so a 4n evaluation must agree."""
        z = 2.0 * np.pi * grid3d.coordinates()[2]
        v = to_spectral(np.stack([np.sin(z), np.cos(z), np.zeros_like(z)]), grid3d)
        v = VectorField(grid3d, v.coeffs, solenoidal=True)
        fine = Grid(3, 4 * grid3d.n)
        coarse_out = ladyzhenskaya_divergence(v, 3.0, 0.1)
        fine_out = ladyzhenskaya_divergence(refine(v, fine), 3.0, 0.1)
        restricted = np.where(grid3d.dealias_mask, coarsen(fine_out, grid3d), 0.0)
        assert np.max(np.abs(coarse_out.coeffs - restricted)) < 1e-6 * np.max(np.abs(restricted))

    @pytest.mark.parametrize("p, nu_bar, message", [(1.5, 1.0, "p must be >= 2"), (3.0, -1.0, "nu_bar must be >= 0")])
    def test_invalid_parameters(self, grid2d, rng, p, nu_bar, message):
        with pytest.raises(ValueError, match=message):
            ladyzhenskaya_divergence(solenoidal_random(grid2d, rng), p, nu_bar)


class TestForcing:
    def test_kolmogorov_norm(self, grid2d):
        f = make_forcing(ForcingSpec("kolmogorov_2d", amplitude=2.0, wavenumber=3), grid2d)
        assert np.isclose(l2_norm(f), 2.0 / np.sqrt(2.0))
        assert is_solenoidal(f)

    def test_taylor_green_norm(self, grid3d):
        f = make_forcing(ForcingSpec("taylor_green_3d"), grid3d)
        assert np.isclose(l2_norm(f), 0.5)
        assert is_solenoidal(f)

    def test_zero_forcing(self, grid3d):
        assert l2_norm(make_forcing(ForcingSpec("zero"), grid3d)) == 0.0

    @pytest.mark.parametrize("kind, fixture", [("kolmogorov_2d", "grid3d"), ("taylor_green_3d", "grid2d")])
    def test_dimension_mismatch(self, kind, fixture, request):
        with pytest.raises(ValueError, match="needs a"):
            make_forcing(ForcingSpec(kind), request.getfixturevalue(fixture))

    def test_unknown_kind(self):
        with pytest.raises(ValueError, match="forcing kind"):
            ForcingSpec("vortex_ring")
