# =============================================================================
# LES TERMS - Advection, Ladyzhenskaya stress and body forcing
# =============================================================================
"""
Nonlinear physics of the model, evaluated pseudospectrally.

- ``advection`` returns the divergence form div(v (x) v), dealiased, not projected.
- ``ladyzhenskaya_divergence`` returns div(nu_bar |grad v|_F^(p-2) grad v).
- ``make_forcing`` builds the Taylor-Green (3D) or Kolmogorov (2D) body force.

The stress integrand |grad v|^(p-2) is not polynomial for non-even p, so the
2/3 rule leaves some residual aliasing in the LES term; it is dealiased on
output like every other term.
"""

from dataclasses import dataclass

import numpy as np

from nles.spectral import (
    Grid,
    VectorField,
    dealias_23,
    divergence_of_tensor,
    leray_project,
    relative_divergence,
    tensor_to_spectral,
    to_physical,
    to_physical_tensor,
    to_spectral,
    velocity_gradient,
)


# =============================================================================
# CONSTANTS
# =============================================================================

FORCING_KINDS = ("taylor_green_3d", "kolmogorov_2d", "zero")

# Relative discrete divergence above which advection refuses its input
SOLENOIDAL_TOL = 1e-10


class NonSolenoidalError(ValueError):
    """Raised when a divergence-free field was required."""


# =============================================================================
# FORCING
# =============================================================================


@dataclass(frozen=True)
class ForcingSpec:
    """Body-force description: kind, amplitude and (2D) Kolmogorov wavenumber."""

    kind: str = "kolmogorov_2d"
    amplitude: float = 1.0
    wavenumber: int = 4

    def __post_init__(self) -> None:
        if self.kind not in FORCING_KINDS:
            raise ValueError(f"forcing kind must be one of {FORCING_KINDS}, got {self.kind!r}")
        if not np.isfinite(self.amplitude):
            raise ValueError("forcing amplitude must be finite")
        if int(self.wavenumber) < 1:
            raise ValueError("forcing wavenumber must be >= 1")


def default_forcing(dim: int) -> ForcingSpec:
    """Taylor-Green forcing in 3D, Kolmogorov forcing in 2D."""
    if dim == 3:
        return ForcingSpec(kind="taylor_green_3d")
    return ForcingSpec(kind="kolmogorov_2d")


def make_forcing(spec: ForcingSpec, grid: Grid) -> VectorField:
    """Solenoidal, mean-free forcing field on ``grid``."""
    if spec.kind == "zero":
        return VectorField.zeros(grid)

    coords = grid.coordinates()
    amp = float(spec.amplitude)
    phys = np.zeros((grid.dim,) + grid.physical_shape)
    if spec.kind == "taylor_green_3d":
        if grid.dim != 3:
            raise ValueError("taylor_green_3d forcing needs a 3D grid")
        x, y, z = (2.0 * np.pi * c for c in coords)
        phys[0] = amp * np.sin(x) * np.cos(y) * np.cos(z)
        phys[1] = -amp * np.cos(x) * np.sin(y) * np.cos(z)
    else:
        if grid.dim != 2:
            raise ValueError("kolmogorov_2d forcing needs a 2D grid")
        phys[0] = amp * np.sin(2.0 * np.pi * spec.wavenumber * coords[1])
    return leray_project(to_spectral(phys, grid))


# =============================================================================
# ADVECTION
# =============================================================================


def advection(v: VectorField) -> VectorField:
    """div(v (x) v) = (v . grad) v for solenoidal v, dealiased by the 2/3 rule."""
    div = relative_divergence(v)
    if div > SOLENOIDAL_TOL:
        raise NonSolenoidalError(f"advection needs a solenoidal field (relative divergence {div:.3e})")
    grid = v.grid
    u = to_physical(dealias_23(v))
    flux = u[:, None] * u[None, :]
    out = divergence_of_tensor(tensor_to_spectral(flux, grid), grid)
    return dealias_23(VectorField(grid, out))


# =============================================================================
# LADYZHENSKAYA / SMAGORINSKY STRESS
# =============================================================================


def _frobenius(grad: np.ndarray) -> np.ndarray:
    return np.sqrt(np.sum(grad**2, axis=(0, 1)))


def _power_coefficient(frob: np.ndarray, p: float) -> np.ndarray:
    # p == 2 gives exactly one; for p > 2 the value at a zero gradient is 0
    if p == 2:
        return np.ones_like(frob)
    return np.power(frob, p - 2.0)


def lagged_les_coefficient(v_old: VectorField, p: float) -> np.ndarray:
    """a(x) = |grad v_old(x)|_F^(p-2), evaluated on the physical grid."""
    if p < 2:
        raise ValueError(f"p must be >= 2, got {p}")
    grad = to_physical_tensor(velocity_gradient(dealias_23(v_old)), v_old.grid)
    return _power_coefficient(_frobenius(grad), p)


def variable_viscosity_divergence(v: VectorField, coefficient: np.ndarray, nu_bar: float) -> VectorField:
    """div(nu_bar c(x) grad v) for a physical coefficient field c."""
    grid = v.grid
    if nu_bar == 0.0:
        return VectorField.zeros(grid)
    grad = to_physical_tensor(velocity_gradient(dealias_23(v)), grid)
    stress = nu_bar * coefficient * grad
    out = divergence_of_tensor(tensor_to_spectral(stress, grid), grid)
    return dealias_23(VectorField(grid, out))


def ladyzhenskaya_divergence(v: VectorField, p: float, nu_bar: float) -> VectorField:
    """div(nu_bar |grad v|_F^(p-2) grad v); reduces to nu_bar * Laplacian(v) at p = 2."""
    if p < 2:
        raise ValueError(f"p must be >= 2, got {p}")
    if nu_bar < 0:
        raise ValueError(f"nu_bar must be >= 0, got {nu_bar}")
    if nu_bar == 0.0:
        return VectorField.zeros(v.grid)
    return variable_viscosity_divergence(v, lagged_les_coefficient(v, p), nu_bar)
