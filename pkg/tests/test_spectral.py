"""
Tests for the spectral core.

Validates:
- Grid validation and wavenumber bookkeeping
- Transforms, derivatives and the 2/3 rule
- Leray projection
- Norms, inner products and the energy spectrum
"""

import numpy as np
import pytest

from nles.spectral import (
    Grid,
    GridMismatchError,
    SpectralField,
    VectorField,
    dealias_23,
    energy_spectrum,
    gradient,
    h1_seminorm,
    inner,
    is_solenoidal,
    l2_norm,
    leray_project,
    lp_gradient_norm,
    product,
    random_band_limited,
    relative_divergence,
    to_physical,
    to_spectral,
    vorticity,
    vorticity_magnitude,
)
from tests.helpers import hermitian_defect, shear_field, solenoidal_random


class TestGrid:
    """Grid construction and derived arrays."""

    def test_shapes(self, grid2d):
        assert grid2d.physical_shape == (16, 16)
        assert grid2d.spectral_shape == (16, 9)
        assert grid2d.points == 256
        assert np.isclose(grid2d.lambda1, 4.0 * np.pi**2)

    def test_weights_count_the_full_lattice(self, grid2d, grid3d):
        assert grid2d.weights.sum() == 16**2
        assert grid3d.weights.sum() == 8**3

    @pytest.mark.parametrize("dim, n", [(1, 16), (4, 16), (2, 7), (2, 6)])
    def test_rejects_invalid(self, dim, n):
        with pytest.raises(ValueError):
            Grid(dim, n)

    def test_wavenumber_arrays_are_read_only(self, grid2d):
        with pytest.raises(ValueError):
            grid2d.k_squared[0, 0] = 1.0

    def test_dealias_mask_keeps_two_thirds_band(self, grid2d):
        kept = grid2d.dealias_mask
        for k in grid2d.mode_indices:
            assert np.all(~kept | (3 * np.abs(k) < 16))
        assert kept[5, 5] and not kept[6, 0]


class TestTransforms:
    """Forward/inverse transforms and the coefficient layout."""

    def test_sine_coefficients(self, grid2d):
        x = grid2d.coordinates()[0]
        f = to_spectral(np.sin(2.0 * np.pi * x), grid2d)
        assert isinstance(f, SpectralField)
        assert np.isclose(f.coeffs[1, 0], -0.5j)
        assert np.isclose(f.coeffs[-1, 0], 0.5j)
        np.testing.assert_allclose(np.abs(f.coeffs).sum(), 1.0, atol=1e-14)

    def test_mean_is_mode_zero(self, grid2d):
        g = 3.0 + np.zeros(grid2d.physical_shape)
        assert np.isclose(to_spectral(g, grid2d).coeffs[0, 0], 3.0)

    def test_round_trip(self, grid3d, rng):
        f = random_band_limited(grid3d, rng, vector=True)
        back = to_spectral(to_physical(f), grid3d)
        assert isinstance(back, VectorField)
        np.testing.assert_allclose(back.coeffs, f.coeffs, atol=1e-14)

    def test_nyquist_mode_is_dropped(self, grid2d):
        x = grid2d.coordinates()[0]
        f = to_spectral(np.cos(np.pi * 16 * x), grid2d)
        assert np.max(np.abs(f.coeffs)) < 1e-14

    def test_shape_mismatch(self, grid2d):
        with pytest.raises(GridMismatchError):
            to_spectral(np.zeros((8, 8)), grid2d)

    def test_random_fields_are_real(self, grid3d, rng):
        f = random_band_limited(grid3d, rng, vector=True)
        assert hermitian_defect(f.coeffs, grid3d) < 1e-14
        assert np.all(f.coeffs[(Ellipsis, 0, 0, 0)] == 0)


class TestCalculus:
    """Derivatives, products and the 2/3 rule."""

    def test_gradient_of_sine(self, grid2d):
        x = grid2d.coordinates()[0]
        grad = to_physical(gradient(to_spectral(np.sin(2.0 * np.pi * x), grid2d)))
        np.testing.assert_allclose(grad[0], 2.0 * np.pi * np.cos(2.0 * np.pi * x), atol=1e-12)
        np.testing.assert_allclose(grad[1], 0.0, atol=1e-12)

    def test_product_of_sine_and_cosine(self, grid2d):
        x = grid2d.coordinates()[0]
        f = to_spectral(np.sin(2.0 * np.pi * x), grid2d)
        g = to_spectral(np.cos(2.0 * np.pi * x), grid2d)
        np.testing.assert_allclose(to_physical(product(f, g)), 0.5 * np.sin(4.0 * np.pi * x), atol=1e-14)

    def test_dealias_zeroes_outside_band(self, grid2d, rng):
        f = to_spectral(rng.standard_normal(grid2d.physical_shape), grid2d)
        out = dealias_23(f)
        assert np.all(out.coeffs[~grid2d.dealias_mask] == 0)
        np.testing.assert_array_equal(out.coeffs[grid2d.dealias_mask], f.coeffs[grid2d.dealias_mask])

    def test_dealias_is_an_idempotent_contraction(self, grid3d, rng):
        v = to_spectral(rng.standard_normal((3,) + grid3d.physical_shape), grid3d)
        once = dealias_23(v)
        np.testing.assert_array_equal(dealias_23(once).coeffs, once.coeffs)
        assert l2_norm(once) <= l2_norm(v)

    def test_gradient_matches_centred_differences(self, grid2d, rng):
        """Shifting by +-delta through Fourier phases gives exact samples for a difference quotient."""
        f = random_band_limited(grid2d, rng)
        grad = to_physical(gradient(f))
        delta = 1e-5
        for j, kap in enumerate(grid2d.wavevector):
            ahead = to_physical(f.with_coeffs(f.coeffs * np.exp(1j * kap * delta)))
            behind = to_physical(f.with_coeffs(f.coeffs * np.exp(-1j * kap * delta)))
            quotient = (ahead - behind) / (2.0 * delta)
            assert np.max(np.abs(quotient - grad[j])) < 1e-6 * np.max(np.abs(grad[j]))

    def test_vorticity_of_shear_2d(self, grid2d):
        y = grid2d.coordinates()[1]
        omega = to_physical(vorticity(shear_field(grid2d)))
        np.testing.assert_allclose(omega, -2.0 * np.pi * np.cos(2.0 * np.pi * y), atol=1e-12)
        np.testing.assert_allclose(vorticity_magnitude(shear_field(grid2d)), np.abs(omega), atol=1e-12)

    def test_vorticity_of_shear_3d(self, grid3d):
        y = grid3d.coordinates()[1]
        omega = to_physical(vorticity(shear_field(grid3d)))
        np.testing.assert_allclose(omega[2], -2.0 * np.pi * np.cos(2.0 * np.pi * y), atol=1e-12)
        np.testing.assert_allclose(omega[:2], 0.0, atol=1e-12)


class TestLerayProjection:
    """Projection onto divergence-free fields."""

    def test_projected_field_is_solenoidal(self, grid3d, rng):
        v = random_band_limited(grid3d, rng, vector=True)
        assert relative_divergence(v) > 1e-3
        p = leray_project(v)
        assert p.solenoidal
        assert is_solenoidal(p)

    def test_idempotent(self, grid3d, rng):
        p = solenoidal_random(grid3d, rng)
        np.testing.assert_allclose(leray_project(p).coeffs, p.coeffs, atol=1e-14)

    def test_gradients_are_removed(self, grid2d, rng):
        g = gradient(random_band_limited(grid2d, rng))
        assert l2_norm(leray_project(g)) < 1e-13 * l2_norm(g)

    def test_self_adjoint(self, grid3d, rng):
        v = random_band_limited(grid3d, rng, vector=True)
        w = random_band_limited(grid3d, rng, vector=True)
        assert abs(inner(leray_project(v), w) - inner(v, leray_project(w))) < 1e-12 * l2_norm(v) * l2_norm(w)

    def test_output_stays_real(self, grid3d, rng):
        p = solenoidal_random(grid3d, rng)
        assert hermitian_defect(p.coeffs, grid3d) < 1e-14


class TestNorms:
    """Parseval norms, inner products and spectra."""

    def test_parseval(self, grid3d, rng):
        f = random_band_limited(grid3d, rng, vector=True)
        g = to_physical(f)
        assert np.isclose(l2_norm(f), np.sqrt(np.mean(np.sum(g**2, axis=0))), rtol=1e-12)

    def test_inner_matches_norm(self, grid2d, rng):
        f = random_band_limited(grid2d, rng)
        g = random_band_limited(grid2d, rng)
        assert np.isclose(inner(f, f), l2_norm(f) ** 2)
        assert np.isclose(inner(f, g), inner(g, f))

    def test_inner_rejects_mixed_grids(self, grid2d, rng):
        with pytest.raises(GridMismatchError):
            inner(random_band_limited(grid2d, rng), random_band_limited(Grid(2, 8), rng))

    def test_lp_norm_at_p2_is_h1(self, grid2d, rng):
        v = solenoidal_random(grid2d, rng)
        assert np.isclose(lp_gradient_norm(v, 2.0), h1_seminorm(v), rtol=1e-12)

    def test_lp_norm_rejects_small_p(self, grid2d, rng):
        with pytest.raises(ValueError, match="p must be >= 1"):
            lp_gradient_norm(solenoidal_random(grid2d, rng), 0.5)

    def test_energy_spectrum_single_mode(self, grid2d):
        spectrum = energy_spectrum(shear_field(grid2d))
        assert np.isclose(spectrum.energy[1], 0.25)
        assert np.isclose(spectrum.total, 0.25)

    def test_energy_spectrum_total(self, grid3d, rng):
        v = solenoidal_random(grid3d, rng)
        assert np.isclose(energy_spectrum(v).total, 0.5 * l2_norm(v) ** 2)

    def test_energy_spectrum_of_zero_field(self, grid2d):
        spectrum = energy_spectrum(VectorField.zeros(grid2d))
        assert np.all(spectrum.energy == 0.0)
