"""Diffusion symbols ``J0(xi)`` for the Laplacian, fractional Laplacian and convolution operators.

The linear operator ``A`` is carried entirely by its symbol: the semigroup kernel
satisfies ``F(G(t)) = exp(t (J0 - 1))``.  Near the origin every admissible symbol
behaves like ``1 - a |xi|^beta``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .fields import Field, Grid, forward_dft, read_lattice_csv, reflect_all, reflect_xn


class Family(enum.Enum):
    LAPLACIAN = "laplacian"
    FRACTIONAL = "fractional_laplacian"
    CONVOLUTION = "convolution"


@dataclass(frozen=True, eq=False)
class DiffusionSymbol:
    family: Family
    beta: float
    a: float = 1.0
    kernel: Field | None = None

    def __post_init__(self):
        if not (0 < self.beta <= 2):
            raise ValueError(f"beta must lie in (0, 2], got {self.beta}")
        if not self.a > 0:
            raise ValueError(f"a must be positive, got {self.a}")
        if self.family is Family.LAPLACIAN and self.beta != 2:
            raise ValueError("the Laplacian has beta = 2")
        if self.family is Family.CONVOLUTION:
            if self.kernel is None:
                raise ValueError("convolution symbols need kernel samples")
            _check_kernel(self.kernel)

    @property
    def N(self) -> int | None:
        return self.kernel.grid.N if self.kernel is not None else None

    @property
    def regularizing(self) -> bool:
        return self.family is not Family.CONVOLUTION

    def describe(self) -> dict:
        out = {"family": self.family.value, "beta": self.beta, "a": self.a}
        return out


def _check_kernel(kernel: Field) -> None:
    v = kernel.values
    if np.any(v < 0):
        raise ValueError("kernel samples must be nonnegative")
    mass = kernel.mass()
    if abs(mass - 1.0) > 1e-8:
        raise ValueError(f"kernel samples must have unit mass, got {mass:.12g}")
    if not np.array_equal(v, reflect_xn(v)):
        raise ValueError("kernel samples must be even in x_N")
    if kernel.grid.N > 1:
        flipped = reflect_all(reflect_xn(v))  # x' -> -x', x_N kept
        if not np.array_equal(v, flipped):
            raise ValueError("kernel samples must be even in x'")


def laplacian() -> DiffusionSymbol:
    return DiffusionSymbol(Family.LAPLACIAN, 2.0, 1.0)


def fractional_laplacian(beta: float) -> DiffusionSymbol:
    return DiffusionSymbol(Family.FRACTIONAL, beta, 1.0)


def convolution(kernel: Field, beta: float = 2.0, a: float | None = None) -> DiffusionSymbol:
    """Convolution symbol ``J_hat``; ``a`` defaults to half the second moment (beta = 2)."""
    if kernel is None:
        raise ValueError("convolution symbols need kernel samples")
    if a is None:
        if beta != 2:
            raise ValueError("a must be given when beta < 2")
        g = kernel.grid
        a = 0.5 * float(g.cell * np.sum(g.xn() ** 2 * kernel.values))
    return DiffusionSymbol(Family.CONVOLUTION, beta, a, kernel)


def normalize_kernel(grid: Grid, values: np.ndarray) -> Field:
    values = np.asarray(values, dtype=float)
    return Field(grid, values / (grid.cell * values.sum()))


def gaussian_kernel(grid: Grid, sigma: float) -> Field:
    """Isotropic Gaussian with standard deviation ``sigma`` per axis, unit discrete mass."""
    r2 = grid.radius() ** 2
    values = np.exp(-r2 / (2 * sigma**2))
    return normalize_kernel(grid, _symmetrize(values))


def _symmetrize(values: np.ndarray) -> np.ndarray:
    # the periodic lattice point -L has no mirror partner inside the box; make it self-consistent
    out = values.copy()
    for ax in range(values.ndim):
        out = 0.5 * (out + np.roll(np.flip(out, axis=ax), 1, axis=ax))
    return out


def two_spike_kernel(grid: Grid, spacing: float = 1.0) -> Field:
    """``(delta_{-s} + delta_{+s}) / 2`` along ``x_N`` (1-D sense), sampled as lattice spikes."""
    values = np.zeros(grid.shape)
    k = int(round(spacing / grid.dx))
    if abs(k * grid.dx - spacing) > 1e-9:
        raise ValueError("spike spacing must be a multiple of dx")
    m = grid.n // 2
    centre = (m,) * (grid.N - 1)
    values[centre + (m + k,)] = 1.0
    values[centre + (m - k,)] = 1.0
    return normalize_kernel(grid, values)


def kernel_from_csv(path, grid: Grid, beta: float = 2.0, a: float | None = None) -> DiffusionSymbol:
    values = read_lattice_csv(path, grid)
    return convolution(normalize_kernel(grid, values), beta=beta, a=a)


def eval_symbol(symbol: DiffusionSymbol, xi) -> float:
    xi = np.atleast_1d(np.asarray(xi, dtype=float))
    if xi.ndim != 1:
        raise ValueError("xi must be a single frequency vector")
    if symbol.family is Family.CONVOLUTION:
        if symbol.kernel is None:
            raise ValueError("convolution symbol has no kernel samples")
        g = symbol.kernel.grid
        if xi.shape != (g.N,):
            raise ValueError(f"xi has dimension {xi.size}, kernel lives in N={g.N}")
        phase = sum(c * k for c, k in zip(g.coords(), xi))
        return float(g.cell * np.sum(np.cos(phase) * symbol.kernel.values))
    norm = float(np.linalg.norm(xi))
    return 1.0 - symbol.a * norm**symbol.beta


def symbol_on_grid(symbol: DiffusionSymbol, grid: Grid) -> np.ndarray:
    """``J0`` at every lattice frequency, FFT ordering."""
    if symbol.family is Family.CONVOLUTION:
        if symbol.kernel.grid != grid:
            raise ValueError("convolution kernel must be sampled on the simulation grid")
        return forward_dft(symbol.kernel).real
    return 1.0 - symbol.a * grid.xi_norm() ** symbol.beta


def imaginary_defect(symbol: DiffusionSymbol) -> float:
    """Largest imaginary part of the discrete transform of the kernel samples."""
    if symbol.kernel is None:
        return 0.0
    return float(np.max(np.abs(forward_dft(symbol.kernel).imag)))


@dataclass
class AssumptionReport:
    r: float
    tol: float
    value_at_zero: float
    unit_mass_ok: bool
    sup_beyond_r: float
    sup_ok: bool
    fit: dict | None
    fit_ok: bool
    passed: bool
    notes: list[str] = field(default_factory=list)


def _sample_frequencies(symbol: DiffusionSymbol, r: float, N: int) -> tuple[np.ndarray, np.ndarray]:
    """Frequencies ``|xi| >= r`` where the symbol is checked, with their ``J0`` values."""
    if symbol.family is Family.CONVOLUTION:
        g = symbol.kernel.grid
        norms = g.xi_norm()
        vals = symbol_on_grid(symbol, g)
        mask = norms >= r - 1e-12
        return norms[mask], vals[mask]
    # radial families: J0 depends on |xi| only and decreases; sample a ray
    radii = r * np.geomspace(1.0, 1e3, 400)
    return radii, 1.0 - symbol.a * radii**symbol.beta


def validate_assumptions(
    symbol: DiffusionSymbol, r: float, tol: float = 1e-10, fit_threshold: float = 0.05
) -> AssumptionReport:
    N = symbol.N or 1
    at0 = eval_symbol(symbol, np.zeros(N))
    mass_ok = abs(at0 - 1.0) <= tol
    _, vals = _sample_frequencies(symbol, r, N)
    sup = float(np.max(vals)) if vals.size else math.nan
    sup_ok = bool(vals.size) and sup < 1.0 - tol
    notes = []
    if not vals.size:
        notes.append(f"no sampled frequency with |xi| >= {r}")
    fit = None
    fit_ok = False
    try:
        lo = min(r, _upper_fit_limit(symbol)) * 0.1
        a_est, b_est, res = fit_small_frequency(symbol, (lo, 10 * lo))
        fit = {"a": a_est, "beta": b_est, "residual": res, "range": [lo, 10 * lo]}
        fit_ok = res <= fit_threshold
    except ValueError as exc:
        notes.append(f"expansion fit failed: {exc}")
    return AssumptionReport(
        r, tol, at0, mass_ok, sup, sup_ok, fit, fit_ok, mass_ok and sup_ok and fit_ok, notes
    )


def _upper_fit_limit(symbol: DiffusionSymbol) -> float:
    if symbol.family is Family.CONVOLUTION:
        return 0.1 * symbol.kernel.grid.nyquist
    return 1.0


def fit_small_frequency(
    symbol: DiffusionSymbol, fit_range: tuple[float, float], samples: int = 32
) -> tuple[float, float, float]:
    """Least squares of ``log(1 - J0)`` on ``log|xi|`` along the ``x_N`` frequency axis.

    Returns ``(a, beta, residual)`` with residual the largest relative misfit of
    ``1 - J0`` against ``a |xi|^beta`` over the sampled range.
    """
    lo, hi = map(float, fit_range)
    if not 0 < lo < hi:
        raise ValueError(f"bad fit range {fit_range}")
    if symbol.family is Family.CONVOLUTION and hi >= symbol.kernel.grid.nyquist:
        raise ValueError("fit range exceeds the grid Nyquist frequency")
    if samples < 8:
        raise ValueError("need at least 8 sample frequencies")
    N = symbol.N or 1
    radii = np.geomspace(lo, hi, samples)
    one_minus = np.empty_like(radii)
    for i, rad in enumerate(radii):
        xi = np.zeros(N)
        xi[-1] = rad
        one_minus[i] = 1.0 - eval_symbol(symbol, xi)
    if np.any(one_minus <= 0):
        raise ValueError("1 - J0 is not positive on the fit range")
    X = np.column_stack([np.ones_like(radii), np.log(radii)])
    coef, *_ = np.linalg.lstsq(X, np.log(one_minus), rcond=None)
    a_est, b_est = float(np.exp(coef[0])), float(coef[1])
    model = a_est * radii**b_est
    residual = float(np.max(np.abs(model - one_minus) / one_minus))
    return a_est, b_est, residual


def fujita_exponent(beta: float, N: int) -> float:
    if not (0 < beta <= 2):
        raise ValueError(f"beta must lie in (0, 2], got {beta}")
    if int(N) != N or N < 1:
        raise ValueError(f"N must be a positive integer, got {N}")
    return 1.0 + beta / (N + 1)


def critical_alpha(beta: float, N: int) -> float:
    return fujita_exponent(beta, N) - 1.0
