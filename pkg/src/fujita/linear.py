"""Exact-in-frequency linear flow ``dv/dt = Av`` and numerical checks of its estimates.

Odd fields are propagated through a type-I sine transform in ``x_N`` so the Dirichlet
trace on ``x_N = 0`` stays exactly zero; everything else goes through the full DFT.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy import integrate, special

from .fields import (
    Field,
    Grid,
    Symmetry,
    forward_dft,
    fourier_l1_norm,
    inverse_dft,
    moment_M1,
    moment_m1,
    odd_extend,
    odd_inverse_transform,
    odd_multiplier,
    odd_transform,
    restrict_to_halfspace,
)
from .kernels import lattice_convolve
from .symbols import DiffusionSymbol, Family, symbol_on_grid


class ProbeOutOfBox(ValueError):
    pass


class LinearPropagator:
    """Caches the symbol on a grid; ``exp(t (J0 - 1))`` is applied in frequency space."""

    def __init__(self, symbol: DiffusionSymbol, grid: Grid):
        self.symbol = symbol
        self.grid = grid
        self.exponent = symbol_on_grid(symbol, grid) - 1.0
        self.odd_exponent = odd_multiplier(grid, self.exponent)

    def half(self, half_data: np.ndarray, t: float) -> np.ndarray:
        """Propagate odd data given by its upper half; returns the upper half."""
        if t == 0:
            return np.array(half_data, dtype=float, copy=True)
        coeffs = odd_transform(self.grid, half_data)
        return odd_inverse_transform(self.grid, coeffs * np.exp(t * self.odd_exponent))

    def half_many(self, half_data: np.ndarray, times) -> list[np.ndarray]:
        coeffs = odd_transform(self.grid, half_data)
        return [
            odd_inverse_transform(self.grid, coeffs * np.exp(t * self.odd_exponent))
            for t in times
        ]

    def __call__(self, field_: Field, t: float) -> Field:
        if t < 0:
            raise ValueError("propagation time must be nonnegative")
        if field_.grid != self.grid:
            raise ValueError("field lives on a different grid")
        if t == 0:
            return field_
        if field_.symmetry is Symmetry.ODD:
            return odd_extend(self.grid, self.half(restrict_to_halfspace(field_), t))
        freq = forward_dft(field_) * np.exp(t * self.exponent)
        keep = field_.symmetry if field_.symmetry is Symmetry.EVEN else Symmetry.NONE
        return inverse_dft(freq, self.grid, keep)


def propagate_linear(field_: Field, symbol: DiffusionSymbol, t: float) -> Field:
    return LinearPropagator(symbol, field_.grid)(field_, t)


def probe_point(gamma: float, t: float, beta: float) -> float:
    return gamma * t ** (1.0 / beta)


def probe_on_half(grid: Grid, half_data: np.ndarray, b: float) -> float:
    """Linear interpolation of odd data at ``(x' = 0, x_N = b)``."""
    if b < 0:
        raise ValueError("probe must lie in the closed half-space")
    if b >= grid.L / 2:
        raise ProbeOutOfBox(f"probe x_N = {b:.4g} beyond L/2 = {grid.L / 2:.4g}")
    m = grid.n // 2
    line = half_data[(m,) * (grid.N - 1)] if grid.N > 1 else half_data
    xs = np.concatenate([[0.0], grid.half_axis])
    ys = np.concatenate([[0.0], line])
    return float(np.interp(b, xs, ys))


def probe_value(field_initial: Field, symbol: DiffusionSymbol, t: float, gamma: float) -> float:
    if field_initial.symmetry is not Symmetry.ODD:
        raise ValueError("probe needs odd initial data")
    b = probe_point(gamma, t, symbol.beta)
    g = field_initial.grid
    if b >= g.L / 2:
        raise ProbeOutOfBox(f"probe x_N = {b:.4g} beyond L/2 = {g.L / 2:.4g}")
    half = LinearPropagator(symbol, g).half(restrict_to_halfspace(field_initial), t)
    return probe_on_half(g, half, b)


@dataclass
class C1Result:
    value: float
    small_gamma: float
    abserr: float


def _cutoff(a: float, beta: float, N: int) -> float:
    # radius beyond which exp(-a r^beta) r^(N+1) < 1e-16
    r = 1.0
    while math.exp(-a * r**beta) * r ** (N + 1) > 1e-16 or r < 1.0:
        r *= 1.25
    return r


def _transverse_weight(zn: float, a: float, beta: float, N: int, cut: float) -> float:
    """``int_{R^{N-1}} exp(-a (|z'|^2 + zn^2)^{beta/2}) dz'``."""
    if N == 1:
        return math.exp(-a * abs(zn) ** beta)
    sphere = 2.0 * math.pi ** ((N - 1) / 2) / special.gamma((N - 1) / 2)
    f = lambda rho: rho ** (N - 2) * math.exp(-a * (rho * rho + zn * zn) ** (beta / 2))
    val, _ = _quad_pieces(f, cut)
    return sphere * val


def _quad_pieces(f, cut: float, **kw) -> tuple[float, float]:
    """Adaptive quadrature on ``[0, cut]`` split at 1, 2, 4, ... (long algebraic tails)."""
    edges = [0.0, 1.0]
    while edges[-1] < cut:
        edges.append(min(2 * edges[-1], cut))
    val = err = 0.0
    for lo, hi in zip(edges[:-1], edges[1:]):
        v, e = integrate.quad(f, lo, hi, limit=200, epsabs=1e-15, epsrel=1e-12, **kw)
        val += v
        err += e
    return val, err


def compute_C1(gamma: float, a: float, beta: float, N: int, tol: float = 1e-10) -> C1Result:
    """``int_{R^N} exp(-a|z|^beta) z_N sin(gamma z_N) dz`` and its small-gamma proxy."""
    if not gamma > 0:
        raise ValueError("gamma must be positive")
    cut = _cutoff(a, beta, N)
    w = lambda zn: _transverse_weight(zn, a, beta, N, cut)
    # the integrand is even in z_N
    val, err = _quad_pieces(lambda zn: zn * w(zn), cut, weight="sin", wvar=gamma)
    second, err2 = _quad_pieces(lambda zn: zn * zn * w(zn), cut)
    if err > tol * max(1.0, abs(val)) or err2 > tol * max(1.0, second):
        raise ArithmeticError(f"C1 quadrature did not converge (errors {err:.2e}, {err2:.2e})")
    return C1Result(2 * val, 2 * gamma * second, 2 * err)


def c1_gaussian(gamma: float, a: float, N: int) -> float:
    """Closed form of ``compute_C1`` for ``beta = 2``."""
    transverse = (math.pi / a) ** ((N - 1) / 2)
    return transverse * math.sqrt(math.pi) * gamma * math.exp(-gamma**2 / (4 * a)) / (2 * a**1.5)


def best_gamma(a: float, beta: float, N: int, grid_points: int = 20) -> tuple[float, float]:
    """Maximizer of ``C1`` over a coarse scan of ``(0, 1]`` with its value."""
    gammas = np.linspace(1.0 / grid_points, 1.0, grid_points)
    vals = [compute_C1(float(gm), a, beta, N).value for gm in gammas]
    i = int(np.argmax(vals))
    return float(gammas[i]), float(vals[i])


def largest_positive_gamma(a: float, beta: float, N: int, gammas) -> float:
    best = math.nan
    for gm in gammas:
        if compute_C1(float(gm), a, beta, N).value > 0:
            best = float(gm)
    return best


def probe_limit(C1: float, M1: float, N: int) -> float:
    """Large-time limit of ``f(t) t^{(N+1)/beta}``: ``(2 pi)^{-N} C1 M1`` with ``M1`` the
    first moment of the odd extension (twice the half-space ``m1``)."""
    return (2 * math.pi) ** (-N) * C1 * M1


def _log_times(window, samples):
    lo, hi = window
    return np.geomspace(lo, hi, samples)


def fit_slope(times, values, shift: float = 1.0) -> float:
    x = np.log(np.asarray(times) + shift)
    y = np.log(np.asarray(values))
    return float(np.polyfit(x, y, 1)[0])


def data_norm(field_: Field) -> float:
    """``m1 + ||F(u0~)||_L1`` of odd data."""
    half = restrict_to_halfspace(field_)
    return moment_m1(field_.grid, half) + fourier_l1_norm(field_)


def edge_ratio(grid: Grid, half: np.ndarray, frac: float = 0.9) -> float:
    """``max |v|`` beyond ``frac * L`` in any direction relative to ``max |v|``."""
    sup = float(np.max(np.abs(half)))
    if sup == 0:
        return 0.0
    mask = np.zeros(grid.half_shape, dtype=bool)
    mask |= grid.half_xn() > frac * grid.L
    for c in grid.half_coords()[:-1]:
        mask |= np.abs(c) > frac * grid.L
    return float(np.max(np.abs(half[mask])) / sup)


@dataclass
class DecayReport:
    times: list[float]
    sup_norms: list[float]
    slope: float
    expected_slope: float
    ratios: list[float]
    max_ratio: float
    data_norm: float
    tolerance: float
    passed: bool

    def to_dict(self) -> dict:
        return asdict(self)


def verify_decay_upper(
    field_initial: Field,
    symbol: DiffusionSymbol,
    t_window=(10.0, 100.0),
    samples: int = 24,
    tol: float = 0.05,
    edge_tol: float = 1e-3,
) -> DecayReport:
    if field_initial.symmetry is not Symmetry.ODD:
        raise ValueError("decay check needs odd data")
    g = field_initial.grid
    N, beta = g.N, symbol.beta
    prop = LinearPropagator(symbol, g)
    times = _log_times(t_window, samples)
    halves = prop.half_many(restrict_to_halfspace(field_initial), times)
    last_edge = edge_ratio(g, halves[-1])
    if last_edge > edge_tol:
        raise ValueError(f"solution reaches the box edge (ratio {last_edge:.2e}); enlarge L")
    sups = [float(np.max(np.abs(h))) for h in halves]
    expo = (N + 1) / beta
    D = data_norm(field_initial)
    ratios = [s * (1 + t) ** expo / D for s, t in zip(sups, times)]
    slope = fit_slope(times, sups)
    return DecayReport(
        times.tolist(), sups, slope, -expo, ratios, max(ratios), D, tol, abs(slope + expo) <= tol
    )


def decay_constant(field_initial: Field, symbol: DiffusionSymbol, t_max: float, samples: int = 200) -> float:
    """``sup_t ||v(t)||_inf (1 + t)^{(N+1)/beta} / (m1 + ||v0_hat||_1)`` over ``[0, t_max]``."""
    g = field_initial.grid
    prop = LinearPropagator(symbol, g)
    times = np.concatenate([[0.0], np.geomspace(1e-3, t_max, samples)])
    halves = prop.half_many(restrict_to_halfspace(field_initial), times)
    expo = (g.N + 1) / symbol.beta
    D = data_norm(field_initial)
    return max(float(np.max(np.abs(h))) * (1 + t) ** expo / D for h, t in zip(halves, times))


@dataclass
class MomentReport:
    M1_initial: float
    M1_final: float
    relative_drift: float
    tolerance: float
    passed: bool
    edge_ratio: float = 0.0
    notes: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return asdict(self)


def verify_moment_conserved(field_: Field, symbol: DiffusionSymbol, t: float, tol: float = 1e-8) -> MomentReport:
    M0 = moment_M1(field_)
    scale = field_.grid.cell * float(np.sum(np.abs(field_.grid.xn() * field_.values)))
    if abs(M0) <= 1e-14 * scale or scale == 0:
        raise ValueError("first moment is zero; relative drift undefined")
    evolved = propagate_linear(field_, symbol, t)
    M1 = moment_M1(evolved)
    drift = abs(M1 - M0) / abs(M0)
    edge = edge_ratio(field_.grid, restrict_to_halfspace(evolved))
    notes = []
    if edge > 1e-12:
        notes.append(f"solution at the box edge is {edge:.1e} of its peak; the box truncates the first moment")
    return MomentReport(M0, M1, drift, tol, drift <= tol, edge, notes)


def smooth_cutoff(s: np.ndarray) -> np.ndarray:
    """Even C-infinity profile equal to 1 on ``[-1, 1]`` and 0 outside ``[-2, 2]``."""
    s = np.abs(np.asarray(s, dtype=float))

    def h(u):
        out = np.zeros_like(u)
        pos = u > 0
        out[pos] = np.exp(-1.0 / u[pos])
        return out

    up, down = h(2.0 - s), h(s - 1.0)
    return up / (up + down)


@dataclass
class TruncationReport:
    R_values: list[float]
    min_sign_outside: list[float]
    bound_constants: list[float]
    odd_defect: list[float]
    constant_spread: float
    sign_tolerance: float
    passed: bool
    notes: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return asdict(self)


def kernel_monotone_in_zn(kernel: Field, tol: float = 0.0) -> bool:
    upper = kernel.values[..., kernel.grid.n // 2 :]
    return bool(np.all(np.diff(upper, axis=-1) <= tol))


def apply_operator(kernel: Field, values: np.ndarray) -> np.ndarray:
    """``J * u - u`` on the lattice (linear convolution, no wrap-around)."""
    return lattice_convolve(kernel.with_values(values), kernel.values) - values


def verify_truncation_bounds(
    kernel: Field,
    R_values=(4.0, 8.0, 16.0),
    beta: float = 2.0,
    sign_tol: float = 1e-10,
    spread_tol: float = 2.0,
) -> TruncationReport:
    if not kernel_monotone_in_zn(kernel):
        raise ValueError("kernel is not nonincreasing in z_N on (0, inf)")
    g = kernel.grid
    r = g.radius()
    xn = g.xn()
    mins, consts, defects, notes = [], [], [], []
    for R in R_values:
        if 2 * R + 1 > g.L:
            raise ValueError(f"R = {R} too large for box half-width {g.L}")
        psi = xn * smooth_cutoff(r / R)
        A_psi = apply_operator(kernel, psi)
        outside = r >= 2 * R
        mins.append(float(np.min(xn[outside] * A_psi[outside])))
        nz = np.abs(xn) > 0
        consts.append(float(np.max(np.abs(A_psi[nz]) * R**beta / np.abs(xn[nz]))))
        flipped = np.roll(np.flip(A_psi, axis=-1), 1, axis=-1)
        defects.append(float(np.max(np.abs(A_psi + flipped))))
    spread = max(consts) / min(consts) if min(consts) > 0 else math.inf
    sign_ok = all(m >= -sign_tol for m in mins)
    if not sign_ok:
        notes.append("sign condition violated outside |x| >= 2R")
    if spread >= spread_tol:
        notes.append(f"bound constants vary by factor {spread:.3g}")
    return TruncationReport(
        list(map(float, R_values)), mins, consts, defects, spread, sign_tol, sign_ok and spread < spread_tol, notes
    )
