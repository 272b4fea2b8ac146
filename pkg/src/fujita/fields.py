"""Lattices, scaled Fourier transforms, odd extension and first moments.

The box ``[-L, L)^N`` is sampled with ``n`` points per axis, ``x_j = -L + j*dx``.
Because ``n`` is even the origin sits at index ``n // 2`` on every axis and the
lattice is closed under ``x -> -x`` (index ``j -> (n - j) mod n``). The last
axis is ``x_N``, the direction normal to the boundary of the half-space.

Fourier conventions::

    F(f)(xi)      = int exp(-i x.xi) f(x) dx           ~ dx^N * fft
    F^{-1}(g)(x)  = (2 pi)^{-N} int exp(i x.xi) g dxi  ~ (dxi / 2 pi)^N * n^N * ifft

Frequency arrays are kept in numpy's FFT ordering (``fftfreq``), never shifted.
"""

from __future__ import annotations

import csv
import enum
import math
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path

import numpy as np
from scipy import fft as sfft
from scipy import interpolate


class Symmetry(enum.Enum):
    NONE = "none"
    ODD = "odd_in_xn"
    EVEN = "even_in_xn"


@dataclass(frozen=True)
class Grid:
    """Uniform periodic lattice on ``[-L, L)^N``."""

    N: int
    L: float
    n: int

    def __post_init__(self):
        if self.N < 1 or self.N > 3:
            raise ValueError(f"dimension N must be 1, 2 or 3, got {self.N}")
        if self.n < 4 or self.n % 2:
            raise ValueError(f"points per axis must be even and >= 4, got {self.n}")
        if not self.L > 0:
            raise ValueError(f"half-width L must be positive, got {self.L}")

    @property
    def dx(self) -> float:
        return 2.0 * self.L / self.n

    @property
    def dxi(self) -> float:
        return math.pi / self.L

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.n,) * self.N

    @property
    def half_shape(self) -> tuple[int, ...]:
        return (self.n,) * (self.N - 1) + (self.n // 2 - 1,)

    @property
    def cell(self) -> float:
        """Lattice cell volume ``dx^N``."""
        return self.dx**self.N

    @property
    def nyquist(self) -> float:
        return math.pi * self.n / (2.0 * self.L)

    @cached_property
    def axis(self) -> np.ndarray:
        # integer offsets keep x -> -x bitwise exact on the lattice
        return self.dx * (np.arange(self.n) - self.n // 2)

    @cached_property
    def xi_axis(self) -> np.ndarray:
        return 2.0 * math.pi * np.fft.fftfreq(self.n, d=self.dx)

    def coords(self) -> list[np.ndarray]:
        return list(np.meshgrid(*([self.axis] * self.N), indexing="ij"))

    def xn(self) -> np.ndarray:
        """``x_N`` broadcast to the lattice shape."""
        shape = (1,) * (self.N - 1) + (self.n,)
        return np.broadcast_to(self.axis.reshape(shape), self.shape)

    def radius(self) -> np.ndarray:
        return np.sqrt(sum(c**2 for c in self.coords()))

    def frequencies(self) -> list[np.ndarray]:
        return list(np.meshgrid(*([self.xi_axis] * self.N), indexing="ij"))

    def xi_norm(self) -> np.ndarray:
        return np.sqrt(sum(k**2 for k in self.frequencies()))

    @cached_property
    def half_axis(self) -> np.ndarray:
        """Positive ``x_N`` values ``dx, 2 dx, ..., L - dx``."""
        return self.axis[self.n // 2 + 1 :]

    def half_xn(self) -> np.ndarray:
        shape = (1,) * (self.N - 1) + (self.n // 2 - 1,)
        return np.broadcast_to(self.half_axis.reshape(shape), self.half_shape)

    def half_coords(self) -> list[np.ndarray]:
        axes = [self.axis] * (self.N - 1) + [self.half_axis]
        return list(np.meshgrid(*axes, indexing="ij"))

    def to_dict(self) -> dict:
        return {"N": self.N, "L": self.L, "n": self.n}


@dataclass(frozen=True)
class Field:
    grid: Grid
    values: np.ndarray
    symmetry: Symmetry = Symmetry.NONE

    def __post_init__(self):
        if self.values.shape != self.grid.shape:
            raise ValueError(
                f"values shape {self.values.shape} does not match grid {self.grid.shape}"
            )

    def sup_norm(self) -> float:
        return float(np.max(np.abs(self.values)))

    def mass(self) -> float:
        return float(self.grid.cell * np.sum(self.values))

    def with_values(self, values: np.ndarray, symmetry: Symmetry | None = None) -> "Field":
        return Field(self.grid, values, self.symmetry if symmetry is None else symmetry)


def reflect_xn(values: np.ndarray) -> np.ndarray:
    """Values at ``(x', -x_N)`` on the periodic lattice."""
    return np.roll(np.flip(values, axis=-1), 1, axis=-1)


def reflect_all(values: np.ndarray) -> np.ndarray:
    """Values at ``-x`` on the periodic lattice."""
    out = values
    for ax in range(values.ndim):
        out = np.roll(np.flip(out, axis=ax), 1, axis=ax)
    return out


def symmetry_defect(field_: Field) -> tuple[float, float]:
    """Max violation of ``u(x', -x_N) = -u(x', x_N)`` and max ``|u|`` on ``x_N = 0``."""
    v = field_.values
    odd = float(np.max(np.abs(v + reflect_xn(v))))
    trace = float(np.max(np.abs(v[..., field_.grid.n // 2])))
    return odd, trace


def odd_extend(grid: Grid, half_data: np.ndarray) -> Field:
    half_data = np.asarray(half_data, dtype=float)
    if half_data.shape != grid.half_shape:
        raise ValueError(f"half data shape {half_data.shape} != {grid.half_shape}")
    m = grid.n // 2
    full = np.zeros(grid.shape)
    full[..., m + 1 :] = half_data
    # x_N = -k dx lives at index m - k; mirrored x' uses the same x' index
    full[..., 1:m] = -half_data[..., ::-1]
    return Field(grid, full, Symmetry.ODD)


def restrict_to_halfspace(field_: Field) -> np.ndarray:
    return field_.values[..., field_.grid.n // 2 + 1 :].copy()


def forward_dft(field_: Field) -> np.ndarray:
    g = field_.grid
    return g.cell * sfft.fftn(sfft.ifftshift(field_.values))


def inverse_dft(freq: np.ndarray, grid: Grid, symmetry: Symmetry = Symmetry.NONE) -> Field:
    values = sfft.fftshift(sfft.ifftn(freq)).real / grid.cell
    return Field(grid, values, symmetry)


def odd_transform(grid: Grid, half_data: np.ndarray) -> np.ndarray:
    """Sine transform in ``x_N`` (Fourier in ``x'``) of an odd field given by its upper half.

    For an odd lattice field the full DFT along ``x_N`` is ``-i`` times a type-I
    sine transform of the upper half, so working with the half alone keeps the
    odd symmetry exact.
    """
    out = sfft.dst(half_data, type=1, axis=-1)
    if grid.N > 1:
        shifted = sfft.ifftshift(out, axes=tuple(range(grid.N - 1)))
        out = sfft.fftn(shifted, axes=tuple(range(grid.N - 1)))
    return out


def odd_inverse_transform(grid: Grid, coeffs: np.ndarray) -> np.ndarray:
    out = coeffs
    if grid.N > 1:
        axes = tuple(range(grid.N - 1))
        out = sfft.fftshift(sfft.ifftn(out, axes=axes), axes=axes).real
    return sfft.idst(np.real(out), type=1, axis=-1)


def odd_multiplier(grid: Grid, symbol_values: np.ndarray) -> np.ndarray:
    """Restrict an even-in-``xi_N`` multiplier on the full frequency lattice to the sine modes."""
    return symbol_values[..., 1 : grid.n // 2]


def moment_m1(grid: Grid, half_data: np.ndarray) -> float:
    half_data = np.asarray(half_data, dtype=float)
    if np.any(half_data < 0):
        raise ValueError("m1 requires nonnegative half-space data")
    return float(grid.cell * np.sum(grid.half_xn() * half_data))


def moment_M1(field_: Field) -> float:
    # the slice x_N = -L is also x_N = +L on the periodic lattice; give it weight 0
    xn = field_.grid.xn().copy()
    xn[..., 0] = 0.0
    return float(field_.grid.cell * np.sum(xn * field_.values))


def fourier_l1_norm(field_: Field) -> float:
    return float(field_.grid.dxi**field_.grid.N * np.sum(np.abs(forward_dft(field_))))


@dataclass
class SmallXiReport:
    xi: list[list[float]]
    abs_transform: list[float]
    predicted: list[float]
    ratios: list[float]
    m1: float
    passed: bool
    tolerance: float = 0.05
    notes: list[str] = field(default_factory=list)


def dft_at(field_: Field, xi: np.ndarray) -> complex:
    """Riemann sum of ``int exp(-i x.xi) f(x) dx`` at an arbitrary frequency."""
    g = field_.grid
    phase = sum(c * k for c, k in zip(g.coords(), xi))
    return complex(g.cell * np.sum(np.exp(-1j * phase) * field_.values))


def verify_fourier_small_xi(
    field_: Field, probe_frequencies, tol: float = 0.05
) -> SmallXiReport:
    g = field_.grid
    m1 = moment_m1(g, np.clip(restrict_to_halfspace(field_), 0, None))
    if m1 <= 0:
        raise ValueError("first moment vanishes; small-frequency check is undefined")
    xis, absf, pred, ratios = [], [], [], []
    for xi in probe_frequencies:
        xi = np.asarray(xi, dtype=float)
        if xi.shape != (g.N,):
            raise ValueError(f"probe frequency {xi} has wrong dimension")
        val = abs(dft_at(field_, xi))
        p = 2.0 * m1 * abs(xi[-1])
        xis.append(xi.tolist())
        absf.append(val)
        pred.append(p)
        ratios.append(val / p if p > 0 else math.nan)
    finite = [r for r in ratios if math.isfinite(r)]
    passed = bool(finite) and abs(finite[-1] - 1.0) <= tol
    notes = []
    for x, a, p in zip(xis, absf, pred):
        if p == 0 and a > 1e-12 * max(1.0, m1):
            passed = False
            notes.append(f"transform {a:.3e} not zero on xi_N = 0 at {x}")
    return SmallXiReport(xis, absf, pred, ratios, m1, passed, tol, notes)


def sample_linear(field_: Field, point) -> float:
    """Multilinear interpolation on the lattice; raises outside ``[-L, L - dx]^N``."""
    g = field_.grid
    point = np.atleast_1d(np.asarray(point, dtype=float))
    if point.shape != (g.N,):
        raise ValueError(f"point {point} has wrong dimension")
    lo, hi = g.axis[0], g.axis[-1]
    if np.any(point < lo - 1e-12) or np.any(point > hi + 1e-12):
        raise ValueError(f"point {point.tolist()} outside the truncation box")
    interp = interpolate.RegularGridInterpolator(
        [g.axis] * g.N, field_.values, method="linear"
    )
    return float(interp(np.clip(point, lo, hi))[0])


def write_field_csv(path: Path, field_: Field) -> None:
    g = field_.grid
    cols = [c.ravel() for c in g.coords()]
    names = [f"x{i + 1}" for i in range(g.N)]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(names + ["value"])
        for row in zip(*cols, field_.values.ravel()):
            w.writerow([repr(float(v)) for v in row])


def read_lattice_csv(path: Path, grid: Grid) -> np.ndarray:
    """Read ``coordinates..., value`` rows onto the full lattice (missing points are 0)."""
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    if data.shape[1] != grid.N + 1:
        raise ValueError(f"{path}: expected {grid.N + 1} columns, got {data.shape[1]}")
    idx = np.rint((data[:, : grid.N] + grid.L) / grid.dx).astype(int)
    off = np.abs(idx * grid.dx - grid.L - data[:, : grid.N])
    if np.any(off > 1e-6 * grid.dx) or np.any(idx < 0) or np.any(idx >= grid.n):
        raise ValueError(f"{path}: coordinates do not lie on the grid lattice")
    values = np.zeros(grid.shape)
    values[tuple(idx.T)] = data[:, grid.N]
    return values
