# =============================================================================
# SPECTRAL - Periodic-domain fields, transforms and spectral calculus
# =============================================================================
"""
Field representation on the periodic box [0,1]^d and the spectral calculus
every other module builds on.

Fields are stored in real-to-complex layout: ``coeffs = rfftn(g) / n**d``, so
``coeffs[0, ..., 0]`` is the mean and a unit-amplitude sine carries 1/2 at
each of its two wave vectors. The wavenumber of mode index ``k`` is
``2*pi*k`` with ``k`` in ``[-n/2, n/2)``. The Nyquist mode (``k = -n/2`` on
any axis) has no conjugate partner and is kept at zero.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from functools import cached_property
from typing import Optional, Tuple, Union

import numpy as np
import scipy.fft

from nles import config_utils


TWO_PI = 2.0 * np.pi


class GridMismatchError(ValueError):
    """Raised when an array or field does not match the expected grid."""


# =============================================================================
# GRID
# =============================================================================


@dataclass(frozen=True)
class Grid:
    """Uniform periodic grid on [0,1]^dim with ``n`` points per axis."""

    dim: int
    n: int
    length: float = field(default=1.0, compare=False)

    def __post_init__(self) -> None:
        if self.dim not in (2, 3):
            raise ValueError(f"dim must be 2 or 3, got {self.dim}")
        if self.n < 8 or self.n % 2 != 0:
            raise ValueError(f"n must be even and >= 8, got {self.n}")
        if self.length != 1.0:
            raise ValueError("only the unit box [0,1]^d is supported")

    # -------------------------------------------------------------------------
    # Shapes & scalars
    # -------------------------------------------------------------------------

    @property
    def physical_shape(self) -> Tuple[int, ...]:
        return (self.n,) * self.dim

    @property
    def spectral_shape(self) -> Tuple[int, ...]:
        return (self.n,) * (self.dim - 1) + (self.n // 2 + 1,)

    @property
    def points(self) -> int:
        return self.n**self.dim

    @property
    def dx(self) -> float:
        return self.length / self.n

    @property
    def lambda1(self) -> float:
        """Smallest Stokes eigenvalue for mean-free fields, 4*pi^2 on the unit box."""
        return TWO_PI**2

    @property
    def axes(self) -> Tuple[int, ...]:
        return tuple(range(self.dim))

    # -------------------------------------------------------------------------
    # Wavenumber arrays (read-only, broadcastable against spectral_shape)
    # -------------------------------------------------------------------------

    @cached_property
    def mode_indices(self) -> Tuple[np.ndarray, ...]:
        """Integer mode index per axis, each shaped to broadcast."""
        out = []
        for axis in range(self.dim):
            if axis == self.dim - 1:
                k = np.arange(self.n // 2 + 1, dtype=float)
            else:
                k = np.fft.fftfreq(self.n, d=1.0 / self.n)
            shape = [1] * self.dim
            shape[axis] = k.size
            k = k.reshape(shape)
            k.setflags(write=False)
            out.append(k)
        return tuple(out)

    @cached_property
    def wavevector(self) -> Tuple[np.ndarray, ...]:
        """Angular wavenumbers kappa_j = 2*pi*k_j."""
        return tuple(_frozen(TWO_PI * k) for k in self.mode_indices)

    @cached_property
    def k_squared(self) -> np.ndarray:
        """Integer |k|^2 on the full spectral shape."""
        out = np.zeros(self.spectral_shape)
        for k in self.mode_indices:
            out = out + k * k
        return _frozen(out)

    @cached_property
    def kappa_squared(self) -> np.ndarray:
        return _frozen(TWO_PI**2 * self.k_squared)

    @cached_property
    def nyquist_mask(self) -> np.ndarray:
        mask = np.zeros(self.spectral_shape, dtype=bool)
        for k in self.mode_indices:
            mask = mask | (np.abs(k) == self.n // 2)
        return _frozen(mask)

    @cached_property
    def dealias_mask(self) -> np.ndarray:
        """True where every |k_j| < n/3 (the retained 2/3 band)."""
        mask = np.ones(self.spectral_shape, dtype=bool)
        for k in self.mode_indices:
            mask = mask & (3.0 * np.abs(k) < self.n)
        return _frozen(mask)

    @cached_property
    def weights(self) -> np.ndarray:
        """Multiplicity of each stored coefficient in the full spectrum."""
        last = np.full(self.n // 2 + 1, 2.0)
        last[0] = 1.0
        last[-1] = 1.0
        shape = [1] * (self.dim - 1) + [last.size]
        return _frozen(np.broadcast_to(last.reshape(shape), self.spectral_shape).copy())

    def coordinates(self) -> Tuple[np.ndarray, ...]:
        """Physical coordinates x_j = j/n as full arrays (``ij`` indexing)."""
        x = np.arange(self.n) * self.dx
        return tuple(np.meshgrid(*([x] * self.dim), indexing="ij"))


def _frozen(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


# =============================================================================
# FIELDS
# =============================================================================


@dataclass(frozen=True, eq=False)
class SpectralField:
    """Fourier coefficients of a real scalar field."""

    grid: Grid
    coeffs: np.ndarray
    mean_free: bool = False

    def __post_init__(self) -> None:
        coeffs = np.asarray(self.coeffs, dtype=np.complex128)
        if coeffs.shape != self.grid.spectral_shape:
            raise GridMismatchError(
                f"coefficient shape {coeffs.shape} does not match grid "
                f"{self.grid.spectral_shape}"
            )
        object.__setattr__(self, "coeffs", coeffs)

    @classmethod
    def zeros(cls, grid: Grid) -> "SpectralField":
        return cls(grid, np.zeros(grid.spectral_shape, dtype=np.complex128), mean_free=True)

    def with_coeffs(self, coeffs: np.ndarray) -> "SpectralField":
        return replace(self, coeffs=coeffs)

    def __add__(self, other: "SpectralField") -> "SpectralField":
        _check_same_grid(self, other)
        return SpectralField(self.grid, self.coeffs + other.coeffs, self.mean_free and other.mean_free)

    def __sub__(self, other: "SpectralField") -> "SpectralField":
        _check_same_grid(self, other)
        return SpectralField(self.grid, self.coeffs - other.coeffs, self.mean_free and other.mean_free)

    def __neg__(self) -> "SpectralField":
        return self.with_coeffs(-self.coeffs)

    def __mul__(self, scalar: float) -> "SpectralField":
        return self.with_coeffs(self.coeffs * float(scalar))

    __rmul__ = __mul__


@dataclass(frozen=True, eq=False)
class VectorField:
    """``dim`` components sharing one grid, stored as one (dim, ...) array."""

    grid: Grid
    coeffs: np.ndarray
    solenoidal: bool = False

    def __post_init__(self) -> None:
        coeffs = np.asarray(self.coeffs, dtype=np.complex128)
        expected = (self.grid.dim,) + self.grid.spectral_shape
        if coeffs.shape != expected:
            raise GridMismatchError(f"vector shape {coeffs.shape} does not match {expected}")
        object.__setattr__(self, "coeffs", coeffs)

    @classmethod
    def zeros(cls, grid: Grid) -> "VectorField":
        shape = (grid.dim,) + grid.spectral_shape
        return cls(grid, np.zeros(shape, dtype=np.complex128), solenoidal=True)

    @property
    def components(self) -> Tuple[SpectralField, ...]:
        return tuple(SpectralField(self.grid, c) for c in self.coeffs)

    def with_coeffs(self, coeffs: np.ndarray, solenoidal: Optional[bool] = None) -> "VectorField":
        flag = self.solenoidal if solenoidal is None else solenoidal
        return replace(self, coeffs=coeffs, solenoidal=flag)

    def __add__(self, other: "VectorField") -> "VectorField":
        _check_same_grid(self, other)
        return VectorField(self.grid, self.coeffs + other.coeffs, self.solenoidal and other.solenoidal)

    def __sub__(self, other: "VectorField") -> "VectorField":
        _check_same_grid(self, other)
        return VectorField(self.grid, self.coeffs - other.coeffs, self.solenoidal and other.solenoidal)

    def __neg__(self) -> "VectorField":
        return self.with_coeffs(-self.coeffs)

    def __mul__(self, scalar: float) -> "VectorField":
        return self.with_coeffs(self.coeffs * float(scalar))

    __rmul__ = __mul__


Field = Union[SpectralField, VectorField]


def _check_same_grid(a: Field, b: Field) -> None:
    if a.grid != b.grid:
        raise GridMismatchError(f"grid mismatch: {a.grid} vs {b.grid}")


def _transform_axes(grid: Grid, ndim: int) -> Tuple[int, ...]:
    return tuple(range(ndim - grid.dim, ndim))


# =============================================================================
# TRANSFORMS
# =============================================================================


def to_physical(f: Field) -> np.ndarray:
    """Real physical-space values; vector fields give a (dim, ...) array."""
    grid = f.grid
    return scipy.fft.irfftn(
        f.coeffs * grid.points,
        s=grid.physical_shape,
        axes=_transform_axes(grid, f.coeffs.ndim),
        workers=config_utils.get_fft_workers(),
    )


def to_spectral(g: np.ndarray, grid: Grid) -> Field:
    """Transform physical values to a SpectralField, or a VectorField for (dim, ...) input."""
    g = np.asarray(g, dtype=float)
    if g.shape == grid.physical_shape:
        kind = SpectralField
    elif g.shape == (grid.dim,) + grid.physical_shape:
        kind = VectorField
    else:
        raise GridMismatchError(f"array shape {g.shape} does not match grid {grid.physical_shape}")
    coeffs = scipy.fft.rfftn(
        g, axes=_transform_axes(grid, g.ndim), workers=config_utils.get_fft_workers()
    )
    coeffs /= grid.points
    coeffs[..., grid.nyquist_mask] = 0.0
    return kind(grid, coeffs)


# =============================================================================
# SPECTRAL CALCULUS
# =============================================================================


def gradient(f: SpectralField) -> VectorField:
    """Component j holds i*kappa_j * f_hat."""
    grid = f.grid
    coeffs = np.stack([1j * kap * f.coeffs for kap in grid.wavevector])
    return VectorField(grid, coeffs, solenoidal=False)


def velocity_gradient(v: VectorField) -> np.ndarray:
    """Coefficients of d v_i / d x_j, shaped (dim, dim, ...) and indexed [i, j]."""
    return np.stack([np.stack([1j * kap * vi for kap in v.grid.wavevector]) for vi in v.coeffs])


def divergence(v: VectorField) -> SpectralField:
    total = np.zeros(v.grid.spectral_shape, dtype=np.complex128)
    for kap, vj in zip(v.grid.wavevector, v.coeffs):
        total = total + 1j * kap * vj
    return SpectralField(v.grid, total)


def divergence_of_tensor(tau_hat: np.ndarray, grid: Grid) -> np.ndarray:
    """Row-wise divergence sum_j i*kappa_j tau_ij of a (dim, dim, ...) coefficient tensor."""
    out = np.zeros((grid.dim,) + grid.spectral_shape, dtype=np.complex128)
    for i in range(grid.dim):
        for j, kap in enumerate(grid.wavevector):
            out[i] += 1j * kap * tau_hat[i, j]
    return out


def leray_project(v: VectorField) -> VectorField:
    """Orthogonal projection onto divergence-free fields; mode 0 is untouched."""
    grid = v.grid
    k2 = grid.kappa_squared
    safe_k2 = np.where(k2 == 0.0, 1.0, k2)
    k_dot_v = np.zeros(grid.spectral_shape, dtype=np.complex128)
    for kap, vj in zip(grid.wavevector, v.coeffs):
        k_dot_v = k_dot_v + kap * vj
    ratio = k_dot_v / safe_k2
    coeffs = np.stack([vj - kap * ratio for kap, vj in zip(grid.wavevector, v.coeffs)])
    return VectorField(grid, coeffs, solenoidal=True)


def relative_divergence(v: VectorField) -> float:
    """max |kappa . v_hat| over max |kappa| |v_hat|, 0 for a zero field."""
    grid = v.grid
    num = np.max(np.abs(divergence(v).coeffs))
    amp = np.sqrt(np.sum(np.abs(v.coeffs) ** 2, axis=0))
    den = np.max(np.sqrt(grid.kappa_squared) * amp)
    if den == 0.0:
        return 0.0
    return float(num / den)


def is_solenoidal(v: VectorField, tol: float = 1e-12) -> bool:
    return relative_divergence(v) <= tol


def dealias_23(f: Field) -> Field:
    """Zero every coefficient with some |k_j| >= n/3."""
    return f.with_coeffs(np.where(f.grid.dealias_mask, f.coeffs, 0.0))


def product(f: SpectralField, g: SpectralField) -> SpectralField:
    """Dealiased pseudospectral product of two scalar fields."""
    _check_same_grid(f, g)
    fp = to_physical(dealias_23(f))
    gp = to_physical(dealias_23(g))
    return dealias_23(to_spectral(fp * gp, f.grid))


def vorticity(v: VectorField) -> Field:
    """Scalar vorticity in 2D, the curl vector in 3D."""
    grid = v.grid
    kap = grid.wavevector
    c = v.coeffs
    if grid.dim == 2:
        return SpectralField(grid, 1j * kap[0] * c[1] - 1j * kap[1] * c[0])
    curl = np.stack(
        [
            1j * kap[1] * c[2] - 1j * kap[2] * c[1],
            1j * kap[2] * c[0] - 1j * kap[0] * c[2],
            1j * kap[0] * c[1] - 1j * kap[1] * c[0],
        ]
    )
    return VectorField(grid, curl, solenoidal=True)


def vorticity_magnitude(v: VectorField) -> np.ndarray:
    omega = to_physical(vorticity(v))
    if v.grid.dim == 2:
        return np.abs(omega)
    return np.sqrt(np.sum(omega**2, axis=0))


# =============================================================================
# NORMS & INNER PRODUCTS
# =============================================================================


def inner(a: Field, b: Field) -> float:
    """L^2 inner product over the unit box, evaluated on coefficients."""
    _check_same_grid(a, b)
    prod = (a.coeffs * np.conj(b.coeffs)).real * a.grid.weights
    return float(np.sum(prod))


def l2_norm(f: Field) -> float:
    return float(np.sqrt(np.sum(np.abs(f.coeffs) ** 2 * f.grid.weights)))


def h1_seminorm(f: Field) -> float:
    return float(np.sqrt(np.sum(np.abs(f.coeffs) ** 2 * f.grid.kappa_squared * f.grid.weights)))


def frobenius_gradient(v: VectorField) -> np.ndarray:
    """Pointwise |grad v|_F of the dealiased field."""
    grad = to_physical_tensor(velocity_gradient(dealias_23(v)), v.grid)
    return np.sqrt(np.sum(grad**2, axis=(0, 1)))


def to_physical_tensor(tensor_hat: np.ndarray, grid: Grid) -> np.ndarray:
    """Transform a (dim, dim, ...) coefficient tensor to physical space."""
    return scipy.fft.irfftn(
        tensor_hat * grid.points,
        s=grid.physical_shape,
        axes=_transform_axes(grid, tensor_hat.ndim),
        workers=config_utils.get_fft_workers(),
    )


def tensor_to_spectral(tensor: np.ndarray, grid: Grid) -> np.ndarray:
    coeffs = scipy.fft.rfftn(
        tensor, axes=_transform_axes(grid, tensor.ndim), workers=config_utils.get_fft_workers()
    )
    coeffs /= grid.points
    coeffs[..., grid.nyquist_mask] = 0.0
    return coeffs


def lp_gradient_norm(v: VectorField, p: float) -> float:
    """||grad v||_{L^p} by the uniform-grid Riemann sum of |grad v|_F^p."""
    if p < 1:
        raise ValueError(f"p must be >= 1, got {p}")
    frob = frobenius_gradient(v)
    return float(np.mean(frob**p) ** (1.0 / p))


# =============================================================================
# ENERGY SPECTRUM
# =============================================================================


@dataclass(frozen=True, eq=False)
class EnergySpectrum:
    wavenumbers: np.ndarray
    energy: np.ndarray

    @property
    def total(self) -> float:
        return float(np.sum(self.energy))


def energy_spectrum(v: VectorField) -> EnergySpectrum:
    """Shell-summed E(k) = 1/2 sum over k-1/2 < |k'| <= k+1/2 of |v_hat(k')|^2."""
    grid = v.grid
    shells = np.ceil(np.sqrt(grid.k_squared) - 0.5).astype(int)
    shells = np.maximum(shells, 0)
    mode_energy = 0.5 * np.sum(np.abs(v.coeffs) ** 2, axis=0) * grid.weights
    energy = np.bincount(shells.ravel(), weights=mode_energy.ravel(), minlength=shells.max() + 1)
    return EnergySpectrum(np.arange(energy.size), energy)


# =============================================================================
# RANDOM FIELDS
# =============================================================================


def random_band_limited(
    grid: Grid,
    rng: np.random.Generator,
    k_max: Optional[int] = None,
    vector: bool = False,
    mean_free: bool = True,
) -> Field:
    """Random real field whose modes satisfy |k_j| <= k_max (default: the 2/3 band)."""
    shape = ((grid.dim,) if vector else ()) + grid.physical_shape
    f = to_spectral(rng.standard_normal(shape), grid)
    if k_max is None:
        mask = grid.dealias_mask
    else:
        mask = np.ones(grid.spectral_shape, dtype=bool)
        for k in grid.mode_indices:
            mask = mask & (np.abs(k) <= k_max)
    coeffs = np.where(mask, f.coeffs, 0.0)
    if mean_free:
        coeffs[(Ellipsis,) + (0,) * grid.dim] = 0.0
    if vector:
        return VectorField(grid, coeffs)
    return SpectralField(grid, coeffs, mean_free=mean_free)
