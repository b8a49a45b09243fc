"""Field builders and checks shared by the test modules."""

import numpy as np

from nles.spectral import VectorField, leray_project, random_band_limited, to_spectral


def solenoidal_random(grid, rng):
    return leray_project(random_band_limited(grid, rng, vector=True))


def shear_field(grid, amplitudes=(1.0,)):
    """u = (sum_m a_m sin(2 pi m y), 0[, 0]); advection of such a field vanishes."""
    y = grid.coordinates()[1]
    phys = np.zeros((grid.dim,) + grid.physical_shape)
    for m, a in enumerate(amplitudes, start=1):
        phys[0] += a * np.sin(2.0 * np.pi * m * y)
    v = to_spectral(phys, grid)
    return VectorField(grid, v.coeffs, solenoidal=True)


def hermitian_defect(coeffs, grid):
    """Max |c(-k) - conj(c(k))| on the last-axis k = 0 plane, where rfft storage is redundant."""
    plane = coeffs[..., 0]
    axes = tuple(range(plane.ndim - (grid.dim - 1), plane.ndim))
    mirror = np.roll(np.flip(plane, axis=axes), 1, axis=axes)
    return float(np.max(np.abs(plane - np.conj(mirror))))
