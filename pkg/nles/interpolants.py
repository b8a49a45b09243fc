# =============================================================================
# INTERPOLANTS - Observation operators I_h
# =============================================================================
"""
Observation operators I_h and empirical checks of their approximation constants.

Two operators are supported:
- ``fourier_truncation`` keeps the open Euclidean ball |k| < k_c, k_c = round(1/h).
  It is an orthogonal projection (c_I = 1) with c0 = 1.
- ``volume_average`` replaces a field by its means over boxes of edge h,
  represented back on the grid as a piecewise-constant field.

Both are linear and idempotent.
"""

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from nles.spectral import (
    Field,
    Grid,
    VectorField,
    h1_seminorm,
    l2_norm,
    to_physical,
    to_spectral,
)


# =============================================================================
# CONSTANTS
# =============================================================================

INTERPOLANT_KINDS = ("fourier_truncation", "volume_average")


# =============================================================================
# INTERPOLANT SPEC
# =============================================================================


@dataclass(frozen=True)
class InterpolantSpec:
    """Observation operator kind and observation scale h."""

    kind: str = "fourier_truncation"
    h: float = 1.0 / 9.0

    def __post_init__(self) -> None:
        if self.kind not in INTERPOLANT_KINDS:
            raise ValueError(f"interpolant kind must be one of {INTERPOLANT_KINDS}, got {self.kind!r}")
        if not self.h > 0:
            raise ValueError(f"h must be > 0, got {self.h}")
        if self.kind == "fourier_truncation" and self.cutoff < 1:
            raise ValueError(f"h = {self.h} gives a Fourier cutoff below 1")

    @property
    def cutoff(self) -> int:
        """k_c = round(1/h) for Fourier truncation."""
        return int(round(1.0 / self.h))

    @property
    def is_diagonal(self) -> bool:
        """True when I_h is a per-mode multiplier (and can be solved implicitly)."""
        return self.kind == "fourier_truncation"

    @property
    def c0(self) -> Optional[float]:
        """Known approximation constant, ``None`` when only an estimate exists."""
        return 1.0 if self.kind == "fourier_truncation" else None

    def boxes_per_axis(self, grid: Grid) -> int:
        """Number of averaging boxes along one axis; raises for incompatible h."""
        count = 1.0 / self.h
        boxes = int(round(count))
        if abs(count - boxes) > 1e-9 or boxes < 1 or grid.n % boxes != 0:
            raise ValueError(
                f"incompatible h = {self.h} for volume averages on n = {grid.n}: "
                "1/h must be an integer dividing n"
            )
        return boxes

    def validate_for(self, grid: Grid) -> None:
        if self.kind == "volume_average":
            self.boxes_per_axis(grid)

    def mask(self, grid: Grid) -> np.ndarray:
        """Retained-mode mask of the Fourier truncation."""
        return grid.k_squared < self.cutoff**2


# =============================================================================
# APPLY
# =============================================================================


def _box_average(values: np.ndarray, grid: Grid, boxes: int) -> np.ndarray:
    lead = values.shape[: values.ndim - grid.dim]
    width = grid.n // boxes
    split = lead + sum(((boxes, width) for _ in range(grid.dim)), ())
    mean_axes = tuple(len(lead) + 2 * i + 1 for i in range(grid.dim))
    means = values.reshape(split).mean(axis=mean_axes, keepdims=True)
    return np.broadcast_to(means, split).reshape(values.shape)


def apply(spec: InterpolantSpec, f: Field) -> Field:
    """I_h(f) for a scalar or vector field."""
    grid = f.grid
    if spec.kind == "fourier_truncation":
        out = f.with_coeffs(np.where(spec.mask(grid), f.coeffs, 0.0))
        return out

    boxes = spec.boxes_per_axis(grid)
    averaged = to_spectral(_box_average(to_physical(f), grid, boxes), grid)
    if isinstance(f, VectorField):
        return averaged.with_coeffs(averaged.coeffs, solenoidal=False)
    return averaged


# =============================================================================
# CONSTANT ESTIMATES
# =============================================================================


@dataclass(frozen=True)
class InterpolantConstants:
    c_I: float
    c0: float
    samples: int


def estimate_constants(spec: InterpolantSpec, samples: Sequence[Field]) -> InterpolantConstants:
    """Empirical c_I = max ||I_h phi|| / ||phi||, c0 = max ||phi - I_h phi|| / (h ||grad phi||)."""
    if not samples:
        raise ValueError("estimate_constants needs at least one sample")
    c_i = 0.0
    c0 = 0.0
    for idx, phi in enumerate(samples):
        norm = l2_norm(phi)
        grad = h1_seminorm(phi)
        if norm == 0.0 or grad == 0.0:
            raise ValueError(f"sample {idx} has zero norm or zero gradient")
        observed = apply(spec, phi)
        c_i = max(c_i, l2_norm(observed) / norm)
        c0 = max(c0, l2_norm(phi - observed) / (spec.h * grad))
    return InterpolantConstants(c_I=c_i, c0=c0, samples=len(samples))


# =============================================================================
# OBSERVED-MODE ACCOUNTING
# =============================================================================


def observed_mode_count(spec: InterpolantSpec, grid: Grid) -> int:
    """Nonzero lattice modes (k and -k counted separately) kept by the truncation and the 2/3 rule."""
    if spec.kind != "fourier_truncation":
        raise ValueError("observed-mode counts are defined for Fourier truncation only")
    kept = spec.mask(grid) & grid.dealias_mask & (grid.k_squared > 0)
    return int(np.sum(grid.weights[kept]))


def observed_fraction(spec: InterpolantSpec, grid: Grid) -> float:
    """Observed modes over all active (dealiased, nonzero) modes."""
    active = grid.dealias_mask & (grid.k_squared > 0)
    return observed_mode_count(spec, grid) / float(np.sum(grid.weights[active]))
