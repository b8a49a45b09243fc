# =============================================================================
# ORACLES - Brute-force cross-checks of the spectral machinery
# =============================================================================
"""
Independent brute-force checks run by ``app.py oracle``.

- ``convolution``: dealiased pseudospectral products and advection on 8^2 and
  8^3 grids against explicit sums over wave-vector pairs.
- ``taylor_green``: decay of the 2D Taylor-Green vortex against its exact
  solution; the observed temporal order of accuracy must be close to 1.
- ``interpolant``: ||phi - I_h phi||^2 against a mode-by-mode tail sum, and
  the bound c0 <= 1/(2 pi) for Fourier truncation.
"""

import itertools
from dataclasses import dataclass
from typing import Callable, Dict, List, Tuple

import numpy as np

from nles import logger
from nles.interpolants import InterpolantSpec, apply
from nles.les_terms import ForcingSpec, advection
from nles.solvers import SimState, SolverConfig, step
from nles.spectral import (
    Grid,
    VectorField,
    h1_seminorm,
    l2_norm,
    leray_project,
    product,
    random_band_limited,
    to_physical,
    to_spectral,
)


@dataclass(frozen=True)
class OracleResult:
    suite: str
    name: str
    passed: bool
    error: float
    tolerance: float

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"{status} {self.suite}/{self.name}: error={self.error:.3e} (tolerance {self.tolerance:.1e})"


def _result(suite: str, name: str, error: float, tolerance: float) -> OracleResult:
    return OracleResult(suite, name, bool(error <= tolerance), float(error), tolerance)


# =============================================================================
# MODE-LIST HELPERS
# =============================================================================


def _full_spectrum(values: np.ndarray, grid: Grid) -> np.ndarray:
    """Complex full-lattice coefficients (numpy.fft layout) of a physical array."""
    return np.fft.fftn(values) / grid.points


def _mode_list(full: np.ndarray, grid: Grid) -> List[Tuple[Tuple[int, ...], complex]]:
    out = []
    # FFT round-off outside the band is dropped
    floor = 1e-13 * float(np.max(np.abs(full)))
    for index in itertools.product(range(grid.n), repeat=grid.dim):
        value = full[index]
        if abs(value) > floor:
            k = tuple(i if i < grid.n // 2 else i - grid.n for i in index)
            out.append((k, complex(value)))
    return out


def _brute_convolution(a: np.ndarray, b: np.ndarray, grid: Grid) -> Dict[Tuple[int, ...], complex]:
    """c(k) = sum over p + q = k of a(p) b(q), on the integer lattice (no wrap-around)."""
    out: Dict[Tuple[int, ...], complex] = {}
    for p, ap in _mode_list(a, grid):
        for q, bq in _mode_list(b, grid):
            k = tuple(pi + qi for pi, qi in zip(p, q))
            out[k] = out.get(k, 0.0) + ap * bq
    return out


def _in_band(k: Tuple[int, ...], grid: Grid) -> bool:
    return all(3 * abs(kj) < grid.n for kj in k)


def _band_error(brute: Dict[Tuple[int, ...], complex], full: np.ndarray, grid: Grid) -> float:
    """Max deviation over the retained band between a brute-force sum and a computed spectrum."""
    worst = 0.0
    for index in itertools.product(range(grid.n), repeat=grid.dim):
        k = tuple(i if i < grid.n // 2 else i - grid.n for i in index)
        if not _in_band(k, grid):
            continue
        worst = max(worst, abs(brute.get(k, 0.0) - full[index]))
    return worst


# =============================================================================
# SUITES
# =============================================================================


def convolution_suite(seed: int = 0) -> List[OracleResult]:
    results = []
    rng = np.random.default_rng(seed)
    for dim in (2, 3):
        grid = Grid(dim, 8)
        f = random_band_limited(grid, rng)
        g = random_band_limited(grid, rng)
        brute = _brute_convolution(
            _full_spectrum(to_physical(f), grid), _full_spectrum(to_physical(g), grid), grid
        )
        computed = _full_spectrum(to_physical(product(f, g)), grid)
        results.append(_result("convolution", f"product_{dim}d", _band_error(brute, computed, grid), 1e-12))

        v = leray_project(random_band_limited(grid, rng, vector=True))
        u_full = [_full_spectrum(c, grid) for c in to_physical(v)]
        adv_full = [_full_spectrum(c, grid) for c in to_physical(advection(v))]
        worst = 0.0
        for i in range(dim):
            total: Dict[Tuple[int, ...], complex] = {}
            for j in range(dim):
                flux = _brute_convolution(u_full[j], u_full[i], grid)
                for k, value in flux.items():
                    total[k] = total.get(k, 0.0) + 2j * np.pi * k[j] * value
            worst = max(worst, _band_error(total, adv_full[i], grid))
        results.append(_result("convolution", f"advection_{dim}d", worst, 1e-11))
    return results


def taylor_green_decay_error(n: int, dt: float, nu: float = 0.05, t_end: float = 0.5) -> float:
    """Relative L2 error of the backward-Euler 2D Taylor-Green decay at ``t_end``."""
    grid = Grid(2, n)
    x, y = (2.0 * np.pi * c for c in grid.coordinates())
    u0 = np.stack([np.sin(x) * np.cos(y), -np.cos(x) * np.sin(y)])
    v0 = to_spectral(u0, grid)
    config = SolverConfig(
        grid=grid, nu=nu, mu=0.0, model="nse", forcing=ForcingSpec(kind="zero"), dt_max=dt, dt_min=min(dt, 1e-6)
    )
    state = SimState(VectorField(grid, v0.coeffs, solenoidal=True))
    steps = int(round(t_end / dt))
    for _ in range(steps):
        state = step(state, config, None, dt)
    exact = v0 * float(np.exp(-nu * 2.0 * (2.0 * np.pi) ** 2 * steps * dt))
    return l2_norm(state.v - exact) / l2_norm(exact)


def taylor_green_suite(seed: int = 0) -> List[OracleResult]:
    coarse = taylor_green_decay_error(16, 0.01)
    fine = taylor_green_decay_error(16, 0.005)
    order = float(np.log2(coarse / fine))
    return [
        _result("taylor_green", "first_order_in_time", abs(order - 1.0), 0.15),
        _result("taylor_green", "error_small", fine, 5e-2),
    ]


def interpolant_suite(seed: int = 0) -> List[OracleResult]:
    rng = np.random.default_rng(seed)
    grid = Grid(2, 16)
    spec = InterpolantSpec("fourier_truncation", h=0.25)
    phi = random_band_limited(grid, rng)
    full = _full_spectrum(to_physical(phi), grid)
    tail = 0.0
    for k, value in _mode_list(full, grid):
        if sum(kj * kj for kj in k) >= spec.cutoff**2:
            tail += abs(value) ** 2
    residual = l2_norm(phi - apply(spec, phi)) ** 2
    c0 = np.sqrt(residual) / (spec.h * h1_seminorm(phi))
    return [
        _result("interpolant", "tail_sum", abs(residual - tail) / max(tail, 1e-300), 1e-12),
        _result("interpolant", "c0_bound", max(0.0, c0 - 1.0 / (2.0 * np.pi)), 1e-12),
    ]


SUITES: Dict[str, Callable[[int], List[OracleResult]]] = {
    "convolution": convolution_suite,
    "taylor_green": taylor_green_suite,
    "interpolant": interpolant_suite,
}


def run_suites(name: str = "all", seed: int = 0) -> List[OracleResult]:
    """Run one suite by name, or every suite for ``all``."""
    if name == "all":
        names = list(SUITES)
    elif name in SUITES:
        names = [name]
    else:
        raise ValueError(f"unknown oracle suite {name!r}; choose from {['all'] + list(SUITES)}")
    results: List[OracleResult] = []
    for suite in names:
        logger.info("oracles", f"running suite {suite}")
        results.extend(SUITES[suite](seed))
    return results
