"""Semigroup kernels ``G(t)`` synthesized from a symbol, plus their oracles.

For the convolution family the kernel is a measure ``exp(-t) delta_0 + (absolutely
continuous part)``; the atom is carried as a scalar weight and never smeared onto
the lattice.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import signal

from .fields import Field, Grid, Symmetry, inverse_dft, reflect_all, reflect_xn, sample_linear
from .symbols import DiffusionSymbol, Family, symbol_on_grid


class AliasingWarning(UserWarning):
    pass


@dataclass(frozen=True, eq=False)
class KernelSnapshot:
    t: float
    values: Field
    dirac_weight: float = 0.0
    warnings: tuple[str, ...] = ()
    truncation_bound: float = 0.0

    @property
    def grid(self) -> Grid:
        return self.values.grid

    def total_mass(self) -> float:
        return self.dirac_weight + self.values.mass()


def kernel_from_symbol(symbol: DiffusionSymbol, t: float, grid: Grid) -> KernelSnapshot:
    if not t > 0:
        raise ValueError(f"kernel time must be positive, got {t}")
    J0 = symbol_on_grid(symbol, grid)
    multiplier = np.exp(t * (J0 - 1.0))
    notes = []
    dirac = 0.0
    if symbol.family is Family.CONVOLUTION:
        dirac = math.exp(-t)
        multiplier = multiplier - dirac
    else:
        tail = float(np.max(np.abs(multiplier[grid.xi_norm() >= 0.999 * grid.nyquist])))
        if tail > 1e-12:
            msg = f"symbol exp(t(J0-1)) = {tail:.2e} at Nyquist; grid too coarse for t={t}"
            notes.append(msg)
            warnings.warn(msg, AliasingWarning, stacklevel=2)
    values = inverse_dft(multiplier, grid, Symmetry.EVEN)
    v = values.values
    # the transform of an even real symbol is even; remove roundoff asymmetry
    v = 0.5 * (v + reflect_xn(v))
    if grid.N > 1:
        v = 0.5 * (v + reflect_all(reflect_xn(v)))
    return KernelSnapshot(t, values.with_values(v), dirac, tuple(notes))


def heat_kernel_closed_form(t: float, x, N: int) -> float | np.ndarray:
    if not t > 0:
        raise ValueError(f"heat kernel time must be positive, got {t}")
    x = np.asarray(x, dtype=float)
    r2 = x**2 if N == 1 else np.sum(x**2, axis=-1)
    out = (4 * math.pi * t) ** (-N / 2) * np.exp(-r2 / (4 * t))
    return float(out) if np.ndim(out) == 0 or (N == 1 and out.size == 1) else out


def heat_kernel_on_grid(t: float, grid: Grid) -> np.ndarray:
    r2 = grid.radius() ** 2
    return (4 * math.pi * t) ** (-grid.N / 2) * np.exp(-r2 / (4 * t))


def lattice_convolve(a: Field, b: np.ndarray) -> np.ndarray:
    """``dx^N (a * b)`` by direct linear convolution, cropped to the box (no wrap-around)."""
    g = a.grid
    full = signal.fftconvolve(a.values, b, mode="full")
    m = g.n // 2
    sl = tuple(slice(m, m + g.n) for _ in range(g.N))
    return g.cell * full[sl]


def poisson_tail(t: float, k_max: int) -> float:
    """``exp(-t) sum_{k > k_max} t^k / k!`` summed term by term."""
    term = math.exp(-t) * t ** (k_max + 1) / math.factorial(k_max + 1)
    total, k = 0.0, k_max + 1
    while term > 1e-300 and (k < k_max + 1000):
        total += term
        k += 1
        term *= t / k
        if term < total * 1e-17:
            break
    return total


def poisson_series_kernel(kernel_samples: Field, t: float, k_max: int) -> KernelSnapshot:
    if k_max < 1:
        raise ValueError("k_max must be at least 1")
    if not t > 0:
        raise ValueError(f"time must be positive, got {t}")
    J = kernel_samples.values
    if np.any(J < 0):
        raise ValueError("kernel samples must be nonnegative")
    total = np.zeros_like(J)
    power = J.copy()
    coeff = math.exp(-t)
    for k in range(1, k_max + 1):
        coeff *= t / k
        total += coeff * power
        if k < k_max:
            power = lattice_convolve(kernel_samples.with_values(power), J)
    values = kernel_samples.with_values(total, Symmetry.EVEN)
    return KernelSnapshot(t, values, math.exp(-t), truncation_bound=poisson_tail(t, k_max))


def halfspace_kernel(snapshot: KernelSnapshot, x, y) -> float:
    """Reflected kernel ``G(t, x'-y', x_N-y_N) - G(t, x'-y', x_N+y_N)`` (continuous part).

    Off-lattice arguments are handled by multilinear interpolation.
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    y = np.atleast_1d(np.asarray(y, dtype=float))
    if x[-1] < 0 or y[-1] < 0:
        raise ValueError("half-space points need x_N >= 0 and y_N >= 0")
    d_minus = x - y
    d_plus = x - y
    d_plus[-1] = x[-1] + y[-1]
    return sample_linear(snapshot.values, d_minus) - sample_linear(snapshot.values, d_plus)


@dataclass
class MonotoneReport:
    monotone: bool
    worst_increase: float
    tolerance: float


def check_monotone_in_xN(snapshot: KernelSnapshot, tol: float = 1e-12) -> MonotoneReport:
    g = snapshot.grid
    upper = snapshot.values.values[..., g.n // 2 :]
    inc = np.diff(upper, axis=-1)
    worst = float(np.max(inc)) if inc.size else 0.0
    return MonotoneReport(worst <= tol, worst, tol)


def is_even_nonincreasing(values: np.ndarray, tol: float = 1e-12) -> bool:
    """1-D samples centred at index ``n // 2`` (periodic lattice convention)."""
    n = values.size
    if not np.allclose(values, np.roll(values[::-1], 1), atol=tol, rtol=0):
        return False
    return bool(np.all(np.diff(values[n // 2 :]) <= tol))


def convolve_preserves_radial_monotone(f: np.ndarray, g: np.ndarray, tol: float = 1e-12) -> bool:
    f = np.asarray(f, dtype=float)
    g = np.asarray(g, dtype=float)
    if f.ndim != 1 or f.shape != g.shape or f.size % 2:
        raise ValueError("inputs must be 1-D arrays of equal even length")
    for arr in (f, g):
        if not is_even_nonincreasing(arr, tol):
            raise ValueError("inputs must be even and nonincreasing on the positive half-line")
    n = f.size
    full = np.convolve(f, g)
    # index n//2 of each input is the origin, so the origin of the product is at n
    h = full[n // 2 : n // 2 + n]
    scale = max(1.0, float(np.max(np.abs(h))))
    return is_even_nonincreasing(h, tol * scale)


def random_even_step_kernel(rng: np.random.Generator, n: int, max_steps: int = 6) -> np.ndarray:
    """Even, nonincreasing on ``(0, inf)``, piecewise-constant samples of length ``n``."""
    m = n // 2
    k = int(rng.integers(1, max_steps + 1))
    cuts = np.sort(rng.choice(np.arange(1, m), size=min(k, m - 1), replace=False))
    heights = np.sort(rng.uniform(0.0, 1.0, size=cuts.size))[::-1]
    half = np.zeros(m + 1)
    prev = 0
    for c, h in zip(cuts, heights):
        half[prev:c] = h
        prev = c
    out = np.zeros(n)
    out[m:] = half[:m]
    out[1:m] = half[1:m][::-1]
    out[0] = half[m]
    return out


@dataclass
class BoxSuggestion:
    L: float
    outside_mass: float
    notes: list[str] = field(default_factory=list)


def suggest_box(symbol: DiffusionSymbol, t: float, grid: Grid, target: float = 1e-10) -> BoxSuggestion:
    """Smallest ``L'`` such that the snapshot mass outside ``|x| <= L'/2`` is below ``target``."""
    snap = kernel_from_symbol(symbol, t, grid)
    r = grid.radius().ravel()
    w = np.abs(snap.values.values.ravel()) * grid.cell
    order = np.argsort(r)[::-1]
    tail = np.cumsum(w[order])
    ok = np.nonzero(tail < target)[0]
    notes = []
    if ok.size == 0:
        notes.append("kernel mass near the box edge exceeds target; enlarge L")
        return BoxSuggestion(2 * grid.L, float(tail[-1]), notes)
    radius = r[order][ok[-1]]
    return BoxSuggestion(float(2 * radius), float(tail[ok[-1]]), notes)
