"""Config ingestion, phase-diagram sweeps, the lemma bundle and plot-script emission."""

from __future__ import annotations

import csv
import datetime as _dt
import io
import json
import logging
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np
import yaml

from .fields import Grid, moment_M1, read_lattice_csv, verify_fourier_small_xi, write_field_csv
from .kernels import (
    check_monotone_in_xN,
    convolve_preserves_radial_monotone,
    kernel_from_symbol,
    random_even_step_kernel,
)
from .linear import (
    best_gamma,
    c1_gaussian,
    compute_C1,
    data_norm,
    decay_constant,
    probe_limit,
    probe_value,
    verify_decay_upper,
    verify_moment_conserved,
    verify_truncation_bounds,
)
from .semilinear import SimConfig, SimResult, Status, epsilon_star, run_simulation
from .symbols import (
    DiffusionSymbol,
    convolution,
    fractional_laplacian,
    gaussian_kernel,
    kernel_from_csv,
    laplacian,
    two_spike_kernel,
    validate_assumptions,
)

log = logging.getLogger(__name__)


class ConfigError(ValueError):
    pass


SIM_DEFAULTS = {
    "t_max": 100.0,
    "dt_initial": 0.05,
    "dt_safety": 0.2,
    "blowup_threshold": 1e8,
    "record_every": 1.0,
    "record_growth": 1.0,
    "dt_min": 1e-12,
    "gamma": None,
    "critical_guard": True,
    "nonlinear": True,
    "odd_solver": "sine",
}


def canonical_bump(grid: Grid, amplitude: float = 1.0) -> np.ndarray:
    """``amplitude * max(0, 1 - |x - e_N|^2)^2`` on the upper half-lattice."""
    c = grid.half_coords()
    r2 = sum(x**2 for x in c[:-1]) + (c[-1] - 1.0) ** 2
    return amplitude * np.clip(1.0 - r2, 0.0, None) ** 2


# -- config ----------------------------------------------------------------


def _section(raw: dict, key: str) -> dict:
    val = raw.get(key)
    if not isinstance(val, dict):
        raise ConfigError(f"missing or malformed section '{key}'")
    return val


def build_grid(sec: dict) -> Grid:
    try:
        return Grid(int(sec["N"]), float(sec["L"]), int(sec["n"]))
    except KeyError as exc:
        raise ConfigError(f"grid needs {exc.args[0]}") from None
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def build_symbol(sec: dict, grid: Grid, base_dir: Path = Path(".")) -> DiffusionSymbol:
    family = sec.get("family", "laplacian")
    try:
        if family == "laplacian":
            return laplacian()
        if family == "fractional_laplacian":
            return fractional_laplacian(float(sec["beta"]))
        if family == "convolution":
            beta = float(sec.get("beta", 2.0))
            a = sec.get("a")
            k = sec.get("kernel") or {}
            kind = k.get("kind", "gaussian")
            if kind == "gaussian":
                return convolution(gaussian_kernel(grid, float(k.get("sigma", 1.0))), beta, a)
            if kind == "two_spike":
                return convolution(two_spike_kernel(grid, float(k.get("spacing", 1.0))), beta, a)
            if kind == "csv":
                return kernel_from_csv(base_dir / k["path"], grid, beta, a)
            raise ConfigError(f"unknown kernel kind '{kind}'")
    except KeyError as exc:
        raise ConfigError(f"symbol section needs {exc.args[0]}") from None
    except (ValueError, OSError) as exc:
        raise ConfigError(str(exc)) from None
    raise ConfigError(f"unknown symbol family '{family}'")


def build_initial(sec: dict, grid: Grid, base_dir: Path = Path(".")) -> tuple[np.ndarray, dict]:
    kind = sec.get("kind", "bump")
    if kind == "bump":
        amp = float(sec.get("amplitude", 1.0))
        if not amp > 0:
            raise ConfigError("bump amplitude must be positive")
        return canonical_bump(grid, amp), {"kind": "bump", "amplitude": amp}
    if kind == "zero":
        return np.zeros(grid.half_shape), {"kind": "zero"}
    if kind == "csv":
        try:
            full = read_lattice_csv(base_dir / sec["path"], grid)
        except (KeyError, ValueError, OSError) as exc:
            raise ConfigError(f"initial data: {exc}") from None
        return full[..., grid.n // 2 + 1 :], {"kind": "csv", "path": str(sec["path"])}
    raise ConfigError(f"unknown initial data kind '{kind}'")


def config_from_dict(raw: dict, base_dir: Path = Path(".")) -> SimConfig:
    if not isinstance(raw, dict):
        raise ConfigError("config must be a mapping")
    grid = build_grid(_section(raw, "grid"))
    symbol = build_symbol(raw.get("symbol") or {}, grid, base_dir)
    if "alpha" not in raw:
        raise ConfigError("config needs alpha")
    half, desc = build_initial(raw.get("initial") or {}, grid, base_dir)
    sim = dict(SIM_DEFAULTS)
    extra = raw.get("simulation") or {}
    unknown = set(extra) - set(SIM_DEFAULTS)
    if unknown:
        raise ConfigError(f"unknown simulation keys {sorted(unknown)}")
    sim.update(extra)
    for key in ("t_max", "dt_initial", "dt_safety", "blowup_threshold", "record_every", "record_growth", "dt_min"):
        sim[key] = float(sim[key])
    try:
        return SimConfig(symbol, grid, float(raw["alpha"]), half, initial_description=desc, **sim)
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from None


def load_yaml(path: Path) -> dict:
    try:
        raw = yaml.safe_load(Path(path).read_text())
    except (OSError, yaml.YAMLError) as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from None
    if not isinstance(raw, dict):
        raise ConfigError(f"{path} does not hold a mapping")
    return raw


def load_config(path: Path) -> SimConfig:
    return config_from_dict(load_yaml(path), Path(path).parent)


def echo_config(config: SimConfig, symbol_section: dict | None = None) -> dict:
    """Round-trippable config dict with every default spelled out."""
    d = config.to_dict()
    sym = dict(d["symbol"])
    if symbol_section and "kernel" in symbol_section:
        sym["kernel"] = dict(symbol_section["kernel"])
    return {
        "grid": d["grid"],
        "symbol": sym,
        "alpha": d["alpha"],
        "initial": d["initial"],
        "simulation": {k: d[k] for k in SIM_DEFAULTS},
    }


# -- simulate --------------------------------------------------------------


def simulate(config: SimConfig, out_dir: Path) -> SimResult:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    result = run_simulation(config)
    result.write_json(out_dir / "result.json")
    result.write_csv(out_dir / "series.csv")
    return result


# -- sweep -----------------------------------------------------------------


@dataclass
class SweepSpec:
    base: dict
    alpha_values: list[float]
    amplitude_values: list[float]
    repetitions: int = 1
    eps_star_fractions: list[float] = field(default_factory=list)
    base_dir: Path = Path(".")

    def __post_init__(self):
        if not self.alpha_values or not (self.amplitude_values or self.eps_star_fractions):
            raise ConfigError("sweep needs alpha values and amplitudes")
        if any(a <= 0 for a in self.alpha_values):
            raise ConfigError("alpha values must be positive")
        if any(a <= 0 for a in self.amplitude_values) or any(f <= 0 for f in self.eps_star_fractions):
            raise ConfigError("amplitudes must be positive")
        if self.repetitions < 1:
            raise ConfigError("repetitions must be >= 1")
        # validate the template once
        config_from_dict(self.base, self.base_dir)

    @classmethod
    def from_dict(cls, raw: dict, base_dir: Path = Path(".")) -> "SweepSpec":
        sec = raw.get("sweep")
        if not isinstance(sec, dict):
            raise ConfigError("sweep spec needs a 'sweep' section")
        base = {k: v for k, v in raw.items() if k != "sweep"}
        base.setdefault("alpha", sec["alpha_values"][0] if sec.get("alpha_values") else 1.0)
        try:
            return cls(
                base,
                [float(a) for a in sec.get("alpha_values", [])],
                [float(a) for a in sec.get("amplitude_values", [])],
                int(sec.get("repetitions", 1)),
                [float(f) for f in sec.get("eps_star_fractions", [])],
                base_dir,
            )
        except (TypeError, ValueError) as exc:
            if isinstance(exc, ConfigError):
                raise
            raise ConfigError(f"bad sweep section: {exc}") from None

    def point_config(self, alpha: float, amplitude: float, level: int) -> dict:
        raw = json.loads(json.dumps(self.base))
        raw["alpha"] = alpha
        raw["initial"] = {"kind": "bump", "amplitude": amplitude}
        raw["grid"] = dict(raw["grid"])
        raw["grid"]["n"] = int(raw["grid"]["n"]) * 2**level
        return raw


@dataclass
class PhasePoint:
    alpha: float
    amplitude: float
    grid_level: int
    status: str
    t_star: float | None = None
    fitted_rate: float | None = None
    source: str = "absolute"
    error: str | None = None


def _run_point(args) -> PhasePoint:
    raw, base_dir, level, source = args
    try:
        res = run_simulation(config_from_dict(raw, Path(base_dir)))
        return PhasePoint(raw["alpha"], raw["initial"]["amplitude"], level, res.status.value,
                          res.t_star, res.fitted_rate, source)
    except Exception as exc:  # recorded per point, the sweep goes on
        return PhasePoint(raw["alpha"], raw["initial"]["amplitude"], level, "Error", source=source, error=str(exc))


def eps_star_amplitude(base: dict, alpha: float, fraction: float, base_dir: Path = Path(".")) -> float:
    """Bump amplitude whose data norm is ``fraction * epsilon*`` (needs supercritical alpha)."""
    cfg = config_from_dict({**base, "alpha": alpha, "initial": {"kind": "bump", "amplitude": 1.0}}, base_dir)
    u1 = cfg.initial_field()
    C = decay_constant(u1, cfg.symbol, cfg.t_max)
    return float(fraction * epsilon_star(alpha, cfg.symbol.beta, cfg.N, C) / data_norm(u1))


def sweep_tasks(spec: SweepSpec) -> list:
    tasks = []
    N = int(spec.base["grid"]["N"])
    for level in range(spec.repetitions):
        for alpha in spec.alpha_values:
            amps = [(a, "absolute") for a in spec.amplitude_values]
            cfg = config_from_dict({**spec.base, "alpha": alpha}, spec.base_dir)
            if spec.eps_star_fractions and alpha * (N + 1) > cfg.symbol.beta:
                for frac in spec.eps_star_fractions:
                    amps.append((eps_star_amplitude(spec.base, alpha, frac, spec.base_dir), f"eps_star*{frac:g}"))
            for amp, source in amps:
                tasks.append((spec.point_config(alpha, amp, level), str(spec.base_dir), level, source))
    return tasks


PHASE_COLUMNS = ["alpha", "amplitude", "grid_level", "source", "status", "t_star", "fitted_rate", "error"]


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def phase_csv_text(points: list[PhasePoint], stamp: str | None = None) -> str:
    buf = io.StringIO()
    stamp = stamp or _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds")
    buf.write(f"# generated {stamp}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(PHASE_COLUMNS)
    for p in points:
        d = asdict(p)
        w.writerow([_fmt(d[c]) for c in PHASE_COLUMNS])
    return buf.getvalue()


def read_phase_csv(path: Path) -> list[PhasePoint]:
    lines = [ln for ln in Path(path).read_text().splitlines() if not ln.startswith("#")]
    out = []
    for row in csv.DictReader(lines):
        out.append(PhasePoint(
            float(row["alpha"]), float(row["amplitude"]), int(row["grid_level"]), row["status"],
            float(row["t_star"]) if row["t_star"] else None,
            float(row["fitted_rate"]) if row["fitted_rate"] else None,
            row["source"], row["error"] or None,
        ))
    return out


def empirical_threshold(points: list[PhasePoint]) -> float | None:
    """Largest tested alpha at which every amplitude blew up."""
    best = None
    for alpha in sorted({p.alpha for p in points}):
        group = [p for p in points if p.alpha == alpha]
        if group and all(p.status == Status.BLEW_UP.value for p in group):
            best = alpha
    return best


def run_sweep(spec: SweepSpec, out_dir: Path | None = None, threads: int = 1) -> tuple[list[PhasePoint], dict]:
    t0 = time.perf_counter()
    tasks = sweep_tasks(spec)
    if threads > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            points = list(pool.map(_run_point, tasks))
    else:
        points = [_run_point(t) for t in tasks]
    points.sort(key=lambda p: (p.grid_level, p.alpha, p.amplitude, p.source))
    summary = {
        "alpha_hat": empirical_threshold(points),
        "tested_alpha": sorted(set(spec.alpha_values)),
        "points": len(points),
        "errors": sum(p.status == "Error" for p in points),
        "runtime_s": time.perf_counter() - t0,
    }
    if out_dir is not None:
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        (out_dir / "phase.csv").write_text(phase_csv_text(points))
        (out_dir / "summary.json").write_text(json.dumps(summary, indent=2))
        cfg_dir = out_dir / "points"
        cfg_dir.mkdir(exist_ok=True)
        for i, (raw, *_rest) in enumerate(tasks):
            full = echo_config(config_from_dict(raw, spec.base_dir), raw.get("symbol"))
            (cfg_dir / f"point_{i:03d}.yaml").write_text(yaml.safe_dump(full, sort_keys=True))
    return points, summary


# -- lemma bundle ----------------------------------------------------------

LEMMA_TAGS = (
    "assumptions", "small_xi", "decay_upper", "probe_lower", "C1",
    "truncation", "moment", "radial_monotone", "monotone_kernel",
)


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, np.generic):
        obj = obj.item()
    if isinstance(obj, float) and not math.isfinite(obj):
        return None
    return obj


def _check_small_xi(cfg: SimConfig, **_):
    u0 = cfg.initial_field()
    xis = []
    for s in (1e-1, 3e-2, 1e-2):
        xi = np.zeros(cfg.N)
        xi[-1] = s
        xis.append(xi)
    rep = verify_fourier_small_xi(u0, xis)
    return rep.passed, asdict(rep)


def _check_decay(cfg: SimConfig, **_):
    tol = 0.05 if cfg.symbol.beta == 2 else 0.1
    rep = verify_decay_upper(cfg.initial_field(), cfg.symbol, tol=tol)
    return rep.passed, rep.to_dict()


def _check_probe(cfg: SimConfig, window=(50.0, 200.0), samples: int = 12, tol: float = 0.1, **_):
    s = cfg.symbol
    gamma = cfg.gamma if cfg.gamma is not None else best_gamma(s.a, s.beta, cfg.N)[0]
    C1 = compute_C1(gamma, s.a, s.beta, cfg.N).value
    u0 = cfg.initial_field()
    limit = probe_limit(C1, moment_M1(u0), cfg.N)
    expo = (cfg.N + 1) / s.beta
    times = np.geomspace(*window, samples)
    ratios = [probe_value(u0, s, float(t), gamma) * t**expo / limit for t in times]
    worst = max(abs(r - 1.0) for r in ratios)
    return worst <= tol, {"gamma": gamma, "C1": C1, "limit": limit, "times": times.tolist(),
                          "ratios": ratios, "worst_deviation": worst, "tolerance": tol}


def _check_C1(cfg: SimConfig, **_):
    s = cfg.symbol
    out = {}
    ref = compute_C1(0.1, 1.0, 2.0, 1).value
    closed = c1_gaussian(0.1, 1.0, 1)
    out["gaussian_reference"] = {"computed": ref, "closed_form": closed, "error": abs(ref - closed)}
    ok = abs(ref - closed) <= 1e-6
    gamma, value = best_gamma(s.a, s.beta, cfg.N)
    out["best_gamma"] = gamma
    out["C1_best"] = value
    ok = ok and value > 0
    small = compute_C1(1e-3, s.a, s.beta, cfg.N)
    out["small_gamma_ratio"] = small.value / small.small_gamma
    ok = ok and abs(out["small_gamma_ratio"] - 1.0) <= 1e-3
    if s.beta == 2:
        out["closed_form_best"] = c1_gaussian(gamma, s.a, cfg.N)
        ok = ok and abs(out["closed_form_best"] - value) <= 1e-6 * max(1.0, value)
    return ok, out


def _check_truncation(cfg: SimConfig, **_):
    if cfg.symbol.kernel is not None and cfg.N == 1 and cfg.grid.L >= 33:
        kernel = cfg.symbol.kernel
    else:
        kernel = gaussian_kernel(Grid(1, 64.0, 1024), 1.0)
    rep = verify_truncation_bounds(kernel)
    return rep.passed, rep.to_dict()


def _check_moment(cfg: SimConfig, **_):
    rep = verify_moment_conserved(cfg.initial_field(), cfg.symbol, 10.0)
    return rep.passed, rep.to_dict()


def _check_radial(cfg: SimConfig, seed: int = 0, cases: int = 1000, **_):
    rng = np.random.default_rng(seed)
    passed = 0
    for _i in range(cases):
        f = random_even_step_kernel(rng, 64)
        g = random_even_step_kernel(rng, 64)
        passed += convolve_preserves_radial_monotone(f, g)
    return passed == cases, {"cases": cases, "passed": passed, "seed": seed}


def _check_monotone_kernel(cfg: SimConfig, **_):
    out, ok = {}, True
    for t in (0.1, 1.0, 10.0):
        snap = kernel_from_symbol(cfg.symbol, t, cfg.grid)
        rep = check_monotone_in_xN(snap, tol=1e-12)
        out[str(t)] = asdict(rep)
        ok = ok and rep.monotone
    return ok, out


def _check_assumptions(cfg: SimConfig, **_):
    rep = validate_assumptions(cfg.symbol, 1.0)
    return rep.passed, asdict(rep)


_CHECKS = {
    "assumptions": _check_assumptions,
    "small_xi": _check_small_xi,
    "decay_upper": _check_decay,
    "probe_lower": _check_probe,
    "C1": _check_C1,
    "truncation": _check_truncation,
    "moment": _check_moment,
    "radial_monotone": _check_radial,
    "monotone_kernel": _check_monotone_kernel,
}


def verify_lemmas(config: SimConfig, selection, seed: int = 0, out_dir: Path | None = None) -> dict:
    selection = list(dict.fromkeys(selection))
    unknown = [t for t in selection if t not in _CHECKS]
    if unknown:
        raise ConfigError(f"unknown lemma tags {unknown}; known: {', '.join(LEMMA_TAGS)}")
    checks = {}
    for tag in selection:
        t0 = time.perf_counter()
        try:
            ok, detail = _CHECKS[tag](config, seed=seed)
        except (ValueError, ArithmeticError) as exc:
            ok, detail = False, {"error": str(exc)}
        checks[tag] = {"passed": bool(ok), "runtime_s": time.perf_counter() - t0, "detail": detail}
    report = _jsonable({"passed": all(c["passed"] for c in checks.values()), "checks": checks})
    if out_dir is not None:
        Path(out_dir).mkdir(parents=True, exist_ok=True)
        (Path(out_dir) / "report.json").write_text(json.dumps(report, indent=2))
    return report


# -- kernel snapshot -------------------------------------------------------


def write_kernel(config: SimConfig, t: float, out_dir: Path) -> dict:
    snap = kernel_from_symbol(config.symbol, t, config.grid)
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    write_field_csv(out_dir / "kernel.csv", snap.values)
    info = {
        "t": t,
        "dirac_weight": snap.dirac_weight,
        "total_mass": snap.total_mass(),
        "warnings": list(snap.warnings),
        "symbol": config.symbol.describe(),
        "grid": config.grid.to_dict(),
    }
    (out_dir / "kernel.json").write_text(json.dumps(info, indent=2))
    return info


# -- plot scripts ----------------------------------------------------------

_STATUS_COLORS = {"BlewUp": "#d62728", "Decayed": "#1f77b4", "Undecided": "#7f7f7f", "Error": "#000000"}


def _datablock(name: str, rows) -> str:
    body = "\n".join(" ".join(_fmt(float(v)) for v in r) for r in rows)
    return f"${name} << EOD\n{body}\nEOD\n"


def plot_scripts_for_result(result: dict) -> dict[str, str]:
    cfg = result["config"]
    N = cfg["grid"]["N"]
    beta = cfg["symbol"]["beta"]
    alpha = cfg["alpha"]
    slope = -(N + 1) / beta
    series = [r for r in result["series"] if r["t"] > 0 and r["sup_norm"] and r["sup_norm"] > 0]
    rows = [(r["t"], r["sup_norm"]) for r in series]
    anchor = rows[len(rows) // 2] if rows else (1.0, 1.0)
    scripts = {}
    lines = [
        "set terminal pngcairo size 800,600",
        "set output 'sup_norm.png'",
        "set logscale xy",
        "set xlabel 't'",
        "set ylabel '||u||_inf'",
        f"guide_slope = {slope!r}",
        f"guide(x) = {anchor[1]!r} * (x / {anchor[0]!r}) ** guide_slope",
    ]
    if result["status"] == "BlewUp" and result.get("t_star") is not None:
        lines.append(f"t_star = {result['t_star']!r}")
        lines.append("set arrow from t_star, graph 0 to t_star, graph 1 nohead dt 2 lc rgb 'red'")
    script = _datablock("series", rows) + "\n".join(lines) + "\n"
    script += "plot $series using 1:2 with linespoints title 'sup norm', guide(x) dt 3 title sprintf('slope %g', guide_slope)\n"
    scripts["sup_norm.plot"] = script
    probe = [(r["t"], r["f_probe"] * r["t"] ** (-slope), r["f_probe"] * (1 + r["t"]) ** (1 / alpha))
             for r in result["series"] if r["t"] > 0 and r["f_probe"] is not None and math.isfinite(r["f_probe"])]
    p_lines = [
        "set terminal pngcairo size 800,600",
        "set output 'probe.png'",
        "set logscale x",
        "set xlabel 't'",
        "set ylabel 'normalized probe'",
        f"plot $probe using 1:2 with lines title 'f t^{{{-slope:g}}}', "
        f"$probe using 1:3 with lines title 'f (1+t)^{{1/{alpha:g}}}'",
    ]
    scripts["probe.plot"] = _datablock("probe", probe) + "\n".join(p_lines) + "\n"
    return scripts


def plot_script_for_phase(points: list[PhasePoint]) -> str:
    blocks, plots = [], []
    for status, color in _STATUS_COLORS.items():
        rows = [(p.alpha, p.amplitude) for p in points if p.status == status]
        if not rows:
            continue
        name = status.lower()
        blocks.append(_datablock(name, rows))
        plots.append(f"${name} using 1:2 with points pt 7 ps 1.5 lc rgb '{color}' title '{status}'")
    head = [
        "set terminal pngcairo size 800,600",
        "set output 'phase.png'",
        "set logscale y",
        "set xlabel 'alpha'",
        "set ylabel 'amplitude'",
    ]
    return "".join(blocks) + "\n".join(head) + "\nplot " + ", \\\n     ".join(plots or ["NaN notitle"]) + "\n"


def emit_plots(artifact: Path, out_dir: Path | None = None) -> list[Path]:
    artifact = Path(artifact)
    if artifact.is_dir():
        for name in ("result.json", "phase.csv"):
            if (artifact / name).exists():
                artifact = artifact / name
                break
    if not artifact.is_file():
        raise FileNotFoundError(f"no artifact at {artifact}")
    out_dir = Path(out_dir) if out_dir is not None else artifact.parent
    out_dir.mkdir(parents=True, exist_ok=True)
    if artifact.suffix == ".json":
        scripts = plot_scripts_for_result(json.loads(artifact.read_text()))
    elif artifact.suffix == ".csv":
        scripts = {"phase.plot": plot_script_for_phase(read_phase_csv(artifact))}
    else:
        raise ValueError(f"unrecognized artifact {artifact.name}")
    written = []
    for name, text in scripts.items():
        (out_dir / name).write_text(text)
        written.append(out_dir / name)
    return written
