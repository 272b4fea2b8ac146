"""Strang-split integration of ``du/dt = Au + |u|^alpha u`` on the half-space.

The half-space problem is solved through the odd extension in ``x_N``.  The reaction
substep is the exact flow of ``u' = |u|^alpha u``; the diffusion substep is exact in
frequency space.  Time steps shrink with the pointwise ODE singularity time
``1 / (alpha |u|^alpha)`` so the reaction never overshoots.
"""

from __future__ import annotations

import csv
import enum
import json
import logging
import math
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

import numpy as np

from .fields import (
    Field,
    Grid,
    Symmetry,
    forward_dft,
    inverse_dft,
    moment_M1,
    odd_extend,
    reflect_xn,
    restrict_to_halfspace,
    symmetry_defect,
)
from .linear import (
    LinearPropagator,
    ProbeOutOfBox,
    best_gamma,
    compute_C1,
    data_norm,
    decay_constant,
    fit_slope,
    probe_limit,
    probe_on_half,
    probe_point,
)
from .symbols import DiffusionSymbol, critical_alpha

log = logging.getLogger(__name__)


class BlowupSignal(ArithmeticError):
    """The reaction flow leaves the representable range within the requested step."""

    def __init__(self, singularity_time: float):
        super().__init__(f"pointwise blow-up after {singularity_time:.6g}")
        self.singularity_time = singularity_time


def singularity_time(sup: float, alpha: float) -> float:
    if sup == 0:
        return math.inf
    return 1.0 / (alpha * sup**alpha)


def _react(values: np.ndarray, alpha: float, dt: float) -> np.ndarray:
    mag = np.abs(values) ** alpha
    factor = 1.0 - alpha * dt * mag
    if np.any(factor <= 0):
        raise BlowupSignal(singularity_time(float(np.max(np.abs(values))), alpha))
    # odd map: |-u| = |u| bitwise, so oddness survives exactly
    return values * factor ** (-1.0 / alpha)


def nonlinear_substep(field_: Field, alpha: float, dt: float) -> Field:
    if not dt > 0:
        raise ValueError("dt must be positive")
    return field_.with_values(_react(field_.values, alpha, dt))


class _Scheme:
    """One representation of the state: upper half (sine transform) or the full lattice."""

    def __init__(self, symbol: DiffusionSymbol, grid: Grid, alpha: float, mode: str = "sine", nonlinear: bool = True):
        if mode not in ("sine", "full"):
            raise ValueError(f"unknown odd solver mode {mode!r}")
        self.prop = LinearPropagator(symbol, grid)
        self.grid = grid
        self.alpha = alpha
        self.mode = mode
        self.nonlinear = nonlinear
        self._full_exponent = self.prop.exponent

    def from_half(self, half: np.ndarray) -> np.ndarray:
        if self.mode == "sine":
            return np.array(half, dtype=float, copy=True)
        return odd_extend(self.grid, half).values

    def half(self, state: np.ndarray) -> np.ndarray:
        if self.mode == "sine":
            return state
        return state[..., self.grid.n // 2 + 1 :]

    def full(self, state: np.ndarray) -> Field:
        if self.mode == "sine":
            return odd_extend(self.grid, state)
        return Field(self.grid, state, Symmetry.ODD)

    def linear(self, state: np.ndarray, dt: float) -> np.ndarray:
        if self.mode == "sine":
            return self.prop.half(state, dt)
        freq = forward_dft(Field(self.grid, state)) * np.exp(dt * self._full_exponent)
        return inverse_dft(freq, self.grid).values

    def strang(self, state: np.ndarray, dt: float) -> np.ndarray:
        if not self.nonlinear:
            return self.linear(state, dt)
        state = _react(state, self.alpha, 0.5 * dt)
        state = self.linear(state, dt)
        return _react(state, self.alpha, 0.5 * dt)


def strang_step(field_: Field, symbol: DiffusionSymbol, alpha: float, dt: float) -> Field:
    """Half reaction, full diffusion, half reaction."""
    if not dt > 0:
        raise ValueError("dt must be positive")
    if field_.symmetry is Symmetry.ODD:
        scheme = _Scheme(symbol, field_.grid, alpha, "sine")
        return odd_extend(field_.grid, scheme.strang(restrict_to_halfspace(field_), dt))
    scheme = _Scheme(symbol, field_.grid, alpha, "full")
    return field_.with_values(scheme.strang(field_.values, dt), Symmetry.NONE)


class Status(enum.Enum):
    BLEW_UP = "BlewUp"
    DECAYED = "Decayed"
    UNDECIDED = "Undecided"


@dataclass(eq=False)
class SimConfig:
    symbol: DiffusionSymbol
    grid: Grid
    alpha: float
    initial_half_data: np.ndarray
    t_max: float
    dt_initial: float = 0.05
    dt_safety: float = 0.2
    blowup_threshold: float = 1e8
    record_every: float = 1.0
    record_growth: float = 1.0
    dt_min: float = 1e-12
    gamma: float | None = None
    critical_guard: bool = True
    nonlinear: bool = True
    odd_solver: str = "sine"
    initial_description: dict | None = None

    def __post_init__(self):
        self.initial_half_data = np.asarray(self.initial_half_data, dtype=float)
        if self.initial_half_data.shape != self.grid.half_shape:
            raise ValueError(
                f"initial data shape {self.initial_half_data.shape} != half lattice {self.grid.half_shape}"
            )
        if np.any(self.initial_half_data < 0) or not np.all(np.isfinite(self.initial_half_data)):
            raise ValueError("initial data must be finite and nonnegative")
        if not self.alpha > 0:
            raise ValueError("alpha must be positive")
        if not (0 < self.dt_safety < 1):
            raise ValueError("dt_safety must lie in (0, 1)")
        for name in ("t_max", "dt_initial", "blowup_threshold", "record_every"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if self.record_growth < 1:
            raise ValueError("record_growth must be >= 1")
        if self.odd_solver not in ("sine", "full"):
            raise ValueError(f"odd_solver must be 'sine' or 'full', got {self.odd_solver!r}")
        if self.symbol.kernel is not None and self.symbol.kernel.grid != self.grid:
            raise ValueError("convolution kernel must live on the simulation grid")

    @property
    def N(self) -> int:
        return self.grid.N

    @property
    def decay_exponent(self) -> float:
        return (self.N + 1) / self.symbol.beta

    def initial_field(self) -> Field:
        return odd_extend(self.grid, self.initial_half_data)

    def with_data(self, half: np.ndarray, description: dict | None = None) -> "SimConfig":
        return replace(self, initial_half_data=np.asarray(half, dtype=float), initial_description=description)

    def to_dict(self) -> dict:
        out = {
            "symbol": self.symbol.describe(),
            "grid": self.grid.to_dict(),
            "alpha": self.alpha,
            "t_max": self.t_max,
            "dt_initial": self.dt_initial,
            "dt_safety": self.dt_safety,
            "blowup_threshold": self.blowup_threshold,
            "record_every": self.record_every,
            "record_growth": self.record_growth,
            "dt_min": self.dt_min,
            "gamma": self.gamma,
            "critical_guard": self.critical_guard,
            "nonlinear": self.nonlinear,
            "odd_solver": self.odd_solver,
        }
        if self.initial_description is not None:
            out["initial"] = dict(self.initial_description)
        else:
            out["initial"] = {"kind": "values", "values": self.initial_half_data.tolist()}
        return out


@dataclass
class Record:
    t: float
    sup_norm: float
    M1: float
    f_probe: float
    dt: float


@dataclass(eq=False)
class SimResult:
    status: Status
    t_star: float | None
    fitted_rate: float | None
    series: list[Record]
    config_echo: dict
    steps: int = 0
    notes: list[str] = field(default_factory=list)
    states: dict[float, Field] = field(default_factory=dict, repr=False)

    def to_dict(self) -> dict:
        return {
            "status": self.status.value,
            "t_star": self.t_star,
            "fitted_rate": self.fitted_rate,
            "steps": self.steps,
            "notes": list(self.notes),
            "config": self.config_echo,
            "series": [asdict(r) for r in self.series],
        }

    def write_json(self, path: Path) -> None:
        Path(path).write_text(json.dumps(_jsonable(self.to_dict()), indent=2))

    def write_csv(self, path: Path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["t", "sup_norm", "M1", "f_probe", "dt"])
            for r in self.series:
                w.writerow([repr(float(v)) for v in (r.t, r.sup_norm, r.M1, r.f_probe, r.dt)])


def _jsonable(obj):
    if isinstance(obj, float) and not math.isfinite(obj):
        return None
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.generic):
        return _jsonable(obj.item())
    return obj


def _first_moment(grid: Grid, half: np.ndarray) -> float:
    # odd extension doubles the half-space integral
    return float(2.0 * grid.cell * np.sum(grid.half_xn() * half))


def resolve_gamma(config: SimConfig) -> float:
    if config.gamma is not None:
        return config.gamma
    return best_gamma(config.symbol.a, config.symbol.beta, config.N)[0]


class _Probe:
    """Linear-flow probe ``v(t, gamma t^{1/beta} e_N)`` from the same initial data."""

    def __init__(self, config: SimConfig, prop: LinearPropagator, gamma: float):
        self.config = config
        self.prop = prop
        self.gamma = gamma
        self.alive = True

    def __call__(self, t: float) -> float:
        if not self.alive:
            return math.nan
        b = probe_point(self.gamma, t, self.config.symbol.beta)
        if b >= self.config.grid.L / 2:
            self.alive = False
            return math.nan
        return probe_on_half(self.config.grid, self.prop.half(self.config.initial_half_data, t), b)


def classify_tail(config: SimConfig, series: list[Record]) -> tuple[Status, float | None, list[str]]:
    notes = []
    tail = [r for r in series if r.t >= 0.5 * config.t_max and r.t > 0]
    if len(tail) < 3:
        return Status.UNDECIDED, None, ["too few records in the second half of the horizon"]
    sups = np.array([r.sup_norm for r in tail])
    slope = fit_slope([r.t for r in tail], sups)
    monotone = bool(np.all(np.diff(sups) < 0))
    threshold = -config.decay_exponent + 0.25
    if config.critical_guard and config.alpha <= critical_alpha(config.symbol.beta, config.N) + 1e-12:
        notes.append(
            f"alpha <= beta/(N+1): never classified Decayed (tail slope {slope:.4f})"
        )
        return Status.UNDECIDED, slope, notes
    if monotone and slope <= threshold:
        return Status.DECAYED, slope, notes
    notes.append(f"tail slope {slope:.4f} (threshold {threshold:.4f}), monotone={monotone}")
    return Status.UNDECIDED, slope, notes


def run_simulation(config: SimConfig, keep_states: bool = False, stop_times=()) -> SimResult:
    grid = config.grid
    alpha = config.alpha
    scheme = _Scheme(config.symbol, grid, alpha, config.odd_solver, config.nonlinear)
    echo = config.to_dict()
    if not np.any(config.initial_half_data):
        series = [Record(0.0, 0.0, 0.0, 0.0, 0.0), Record(config.t_max, 0.0, 0.0, 0.0, 0.0)]
        res = SimResult(Status.DECAYED, None, None, series, echo, notes=["zero data is a fixed point"])
        if keep_states:
            res.states = {0.0: config.initial_field(), config.t_max: config.initial_field()}
        return res
    gamma = resolve_gamma(config)
    echo["gamma"] = gamma
    probe = _Probe(config, scheme.prop, gamma)
    state = scheme.from_half(config.initial_half_data)
    t, steps, dt = 0.0, 0, 0.0
    series: list[Record] = []
    states: dict[float, Field] = {}
    notes: list[str] = []
    extra = sorted(float(s) for s in stop_times if 0 < s <= config.t_max)

    def record(t_now: float, dt_used: float):
        half = scheme.half(state)
        series.append(
            Record(t_now, float(np.max(np.abs(half))), _first_moment(grid, half), probe(t_now), dt_used)
        )
        if keep_states:
            states[t_now] = scheme.full(state.copy())

    record(0.0, 0.0)
    next_record = min(config.record_every, config.t_max)
    status, t_star = None, None
    while t < config.t_max:
        sup = float(np.max(np.abs(scheme.half(state))))
        tau = singularity_time(sup, alpha) if config.nonlinear else math.inf
        if config.dt_safety * tau < config.dt_min:
            status, t_star = Status.BLEW_UP, t + tau
            notes.append("adaptive step collapsed below dt_min")
            break
        target = next_record
        while extra and extra[0] <= t:
            extra.pop(0)
        if extra:
            target = min(target, extra[0])
        dt = min(config.dt_initial, config.dt_safety * tau, target - t, config.t_max - t)
        try:
            state = scheme.strang(state, dt)
        except BlowupSignal as sig:
            status, t_star = Status.BLEW_UP, t + sig.singularity_time
            notes.append("reaction substep reached its singularity")
            record(t, dt)
            break
        t = target if abs(t + dt - target) <= 1e-12 * max(1.0, target) else t + dt
        steps += 1
        sup = float(np.max(np.abs(scheme.half(state))))
        if not math.isfinite(sup) or sup >= config.blowup_threshold:
            status, t_star = Status.BLEW_UP, t + singularity_time(sup, alpha)
            record(t, dt)
            break
        if t >= next_record or t >= config.t_max:
            record(t, dt)
            next_record = min(
                max(next_record + config.record_every, next_record * config.record_growth),
                config.t_max,
            )
        elif keep_states and extra and t == extra[0]:
            states[t] = scheme.full(state.copy())
    if not probe.alive:
        notes.append("probe left the box; f_probe series truncated")
    if status is Status.BLEW_UP:
        return SimResult(status, t_star, None, series, echo, steps, notes, states)
    status, rate, more = classify_tail(config, series)
    return SimResult(status, None, rate, series, echo, steps, notes + more, states)


@dataclass
class ComparisonReport:
    times: list[float]
    max_violation: list[float]
    worst: float
    tolerance: float
    blown_up_at: float | None
    passed: bool

    def to_dict(self) -> dict:
        return asdict(self)


def comparison_check(config_small: SimConfig, config_large: SimConfig, t_check, tol: float = 1e-8) -> ComparisonReport:
    """Advance both data sets in lockstep (shared steps) and compare at the sample times."""
    for name in ("alpha", "grid", "odd_solver"):
        if getattr(config_small, name) != getattr(config_large, name):
            raise ValueError(f"configs differ in {name}")
    if config_small.symbol is not config_large.symbol and config_small.symbol.describe() != config_large.symbol.describe():
        raise ValueError("configs differ in symbol")
    cfg = config_large
    scheme = _Scheme(cfg.symbol, cfg.grid, cfg.alpha, cfg.odd_solver, cfg.nonlinear)
    a = scheme.from_half(config_small.initial_half_data)
    b = scheme.from_half(config_large.initial_half_data)
    times = sorted(float(x) for x in t_check)
    t, out, blown = 0.0, [], None
    for target in times:
        while t < target:
            sup = max(float(np.max(np.abs(a))), float(np.max(np.abs(b))))
            tau = singularity_time(sup, cfg.alpha)
            dt = min(cfg.dt_initial, cfg.dt_safety * tau, target - t)
            try:
                a, b = scheme.strang(a, dt), scheme.strang(b, dt)
            except BlowupSignal:
                blown = t
                break
            t = target if abs(t + dt - target) <= 1e-12 * max(1.0, target) else t + dt
            if max(np.max(np.abs(a)), np.max(np.abs(b))) >= cfg.blowup_threshold:
                blown = t
                break
        if blown is not None:
            break
        diff = scheme.half(a) - scheme.half(b)
        out.append(max(0.0, float(np.max(diff))))
    worst = max(out) if out else 0.0
    return ComparisonReport(times[: len(out)], out, worst, tol, blown, worst <= tol)


def nonnegativity_margin(result: SimResult) -> float:
    """Most negative value on the upper half over the kept states before blow-up (0 if none).

    The state that trips the sup-norm threshold is the blow-up itself and is skipped: at that
    point the profile is a spike far below grid resolution and the spectral step rings.
    """
    threshold = result.config_echo.get("blowup_threshold", math.inf)
    lows = []
    for f in result.states.values():
        half = restrict_to_halfspace(f)
        if np.max(np.abs(half)) < threshold:
            lows.append(float(np.min(half)))
    return min([0.0] + lows)


def supersolution_g(t, alpha: float, beta: float, N: int, C_decay: float, data_norm_value: float):
    expo = alpha * (N + 1) - beta
    if expo <= 0:
        raise ValueError("supersolution needs alpha (N+1) > beta")
    coeff = beta * alpha * (C_decay * data_norm_value) ** alpha / expo
    t = np.asarray(t, dtype=float)
    bracket = 1.0 - coeff * (1.0 - (1.0 + t) ** (1.0 - alpha * (N + 1) / beta))
    with np.errstate(divide="ignore", invalid="ignore"):
        g = np.where(bracket > 0, np.abs(bracket) ** (-1.0 / alpha), np.inf)
    return float(g) if g.ndim == 0 else g


def epsilon_star(alpha: float, beta: float, N: int, C_decay: float) -> float:
    expo = alpha * (N + 1) - beta
    if expo <= 0:
        raise ValueError("epsilon* needs alpha (N+1) > beta")
    return (expo / (alpha * beta)) ** (1.0 / alpha) / C_decay


@dataclass
class SupersolutionReport:
    data_norm: float
    epsilon_star: float
    C_decay: float
    g_final: float
    times: list[float]
    max_excess: list[float]
    worst: float
    tolerance: float
    status: str
    passed: bool

    def to_dict(self) -> dict:
        return asdict(self)


def supersolution_check(config: SimConfig, C_decay: float | None = None) -> SupersolutionReport:
    """Compare the nonlinear solution with ``g(t) v(t, x)`` on the half-space."""
    u0 = config.initial_field()
    sup0 = u0.sup_norm()
    D = data_norm(u0) if sup0 > 0 else 0.0
    beta, N, alpha = config.symbol.beta, config.N, config.alpha
    if C_decay is None:
        C_decay = decay_constant(u0, config.symbol, config.t_max) if sup0 > 0 else 1.0
    eps = epsilon_star(alpha, beta, N, C_decay)
    if D >= eps:
        raise ValueError(f"data norm {D:.4g} is not below epsilon* = {eps:.4g}")
    result = run_simulation(config, keep_states=True)
    prop = LinearPropagator(config.symbol, config.grid)
    times, excess = [], []
    for t, f in sorted(result.states.items()):
        u = restrict_to_halfspace(f)
        v = prop.half(config.initial_half_data, t)
        g = supersolution_g(t, alpha, beta, N, C_decay, D)
        times.append(t)
        excess.append(float(np.max(u - g * v)))
    worst = max(excess) if excess else 0.0
    tol = 1e-6 * sup0
    g_final = supersolution_g(config.t_max, alpha, beta, N, C_decay, D)
    ok = worst <= tol and result.status is not Status.BLEW_UP
    return SupersolutionReport(D, eps, C_decay, g_final, times, excess, worst, tol, result.status.value, ok)


@dataclass
class MomentMonotonicityReport:
    nondecreasing: bool
    worst_dip: float
    M1_max: float
    bounded: bool
    symmetry_ok: bool
    worst_odd_defect: float
    even_part_M1: float
    passed: bool
    notes: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return asdict(self)


def moment_monotonicity(result: SimResult, dip_tol: float = 1e-8, sym_tol: float = 1e-12) -> MomentMonotonicityReport:
    M = np.array([r.M1 for r in result.series])
    scale = max(1.0, float(np.max(np.abs(M)))) if M.size else 1.0
    dips = -np.diff(M) / scale if M.size > 1 else np.zeros(0)
    worst_dip = float(max(0.0, np.max(dips))) if dips.size else 0.0
    nondecreasing = worst_dip <= dip_tol
    notes = []
    bounded = bool(np.all(np.isfinite(M)))
    if result.status is Status.DECAYED and M.size > 4:
        # increments over the last quarter must be small next to the total
        q = M[-len(M) // 4 :]
        bounded = bounded and (q[-1] - q[0]) <= 0.05 * max(abs(M[-1]), 1e-300)
    worst_odd, even_M1 = 0.0, 0.0
    for f in result.states.values():
        odd_d, trace = symmetry_defect(f)
        worst_odd = max(worst_odd, odd_d, trace)
        even_part = 0.5 * (f.values + reflect_xn(f.values))
        even_M1 = max(even_M1, abs(moment_M1(f.with_values(even_part))))
    sym_ok = worst_odd <= sym_tol * max(1.0, max((s.sup_norm() for s in result.states.values()), default=1.0))
    if not sym_ok:
        notes.append(f"odd symmetry violated by {worst_odd:.3e}")
    if not nondecreasing:
        notes.append(f"M1 dips by {worst_dip:.3e} (relative)")
    return MomentMonotonicityReport(
        nondecreasing, worst_dip, float(np.max(M)) if M.size else 0.0, bounded, sym_ok, worst_odd,
        even_M1, nondecreasing and bounded and sym_ok, notes,
    )


@dataclass
class ProbeReport:
    gamma: float
    C1: float
    lower_constant: float
    times: list[float]
    f: list[float]
    lower_normalized: list[float]
    jensen_normalized: list[float]
    shifted_normalized: list[float]
    lower_stable: bool
    ceiling_respected: bool | None
    run_status: str
    t_star: float | None
    crossing_time: float | None
    consistent: bool
    notes: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return asdict(self)


def probe_lower_and_upper(
    config: SimConfig, gamma: float | None = None, window=(10.0, 100.0), samples: int = 20,
    stability: float = 0.1, run: SimResult | None = None,
) -> ProbeReport:
    beta, N, alpha = config.symbol.beta, config.N, config.alpha
    a = config.symbol.a
    gamma = gamma if gamma is not None else resolve_gamma(config)
    C1 = compute_C1(gamma, a, beta, N).value
    u0 = config.initial_field()
    M1 = _first_moment(config.grid, config.initial_half_data)
    lower_c = probe_limit(C1, M1, N)
    prop = LinearPropagator(config.symbol, config.grid)
    times = np.geomspace(window[0], window[1], samples)
    fs = []
    halves = prop.half_many(config.initial_half_data, times)
    for t, h in zip(times, halves):
        try:
            fs.append(probe_on_half(config.grid, h, probe_point(gamma, t, beta)))
        except ProbeOutOfBox:
            raise ProbeOutOfBox(f"probe leaves the box before t = {t:.4g}") from None
    fs = np.array(fs)
    p = (N + 1) / beta
    lower = fs * times**p
    jensen = fs * (alpha * times) ** (1 / alpha)
    shifted = fs * (1 + times) ** (1 / alpha)
    # stabilized: last half of the window varies by less than `stability`
    tail = lower[len(lower) // 2 :]
    stable = bool(np.all(tail > 0) and (tail.max() - tail.min()) <= stability * tail.mean())
    if run is None:
        run = run_simulation(config)
    notes = []
    ceiling = None
    crossing = None
    consistent = True
    q = 1 / alpha
    if run.status is not Status.BLEW_UP:
        ceiling = bool(np.all(jensen <= 1.0 + 1e-9))
        consistent = ceiling
        if not ceiling:
            notes.append("global run violates f(t) <= (alpha t)^(-1/alpha)")
    if q > p:
        # C t^-p >= (alpha t)^-q  <=>  t >= (alpha^-q / C)^(1/(q-p))
        crossing = float((alpha ** (-q) / lower_c) ** (1 / (q - p)))
        notes.append(f"lower envelope exceeds the ceiling for t >= {crossing:.4g}")
        if run.status is Status.BLEW_UP:
            consistent = consistent and run.t_star is not None and run.t_star <= crossing
        else:
            consistent = consistent and config.t_max < crossing
    return ProbeReport(
        gamma, C1, lower_c, times.tolist(), fs.tolist(), lower.tolist(), jensen.tolist(), shifted.tolist(),
        stable, ceiling, run.status.value, run.t_star, crossing, consistent and stable, notes,
    )
