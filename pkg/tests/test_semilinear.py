import json
import math

import numpy as np
import pytest
from scipy import integrate

from fujita.experiments import canonical_bump
from fujita.fields import Field, Grid, Symmetry, odd_extend, reflect_xn, restrict_to_halfspace
from fujita.linear import data_norm, decay_constant, propagate_linear
from fujita.semilinear import (
    BlowupSignal,
    SimConfig,
    Status,
    comparison_check,
    epsilon_star,
    moment_monotonicity,
    nonlinear_substep,
    nonnegativity_margin,
    probe_lower_and_upper,
    run_simulation,
    strang_step,
    supersolution_check,
    supersolution_g,
)
from fujita.symbols import laplacian

G1 = Grid(1, 256.0, 8192)


def cfg(alpha, amplitude=1.0, grid=G1, **kw):
    kw.setdefault("t_max", 50.0)
    kw.setdefault("dt_initial", 0.25)
    return SimConfig(laplacian(), grid, alpha, canonical_bump(grid, amplitude),
                     initial_description={"kind": "bump", "amplitude": amplitude}, **kw)


def eps_amplitude(alpha, fraction=0.5, grid=G1, t_max=200.0):
    u1 = odd_extend(grid, canonical_bump(grid))
    C = decay_constant(u1, laplacian(), t_max)
    return fraction * epsilon_star(alpha, 2.0, 1, C) / data_norm(u1)


# -- reaction substep --------------------------------------------------------


def test_substep_closed_form():
    g = Grid(1, 2.0, 8)
    f = Field(g, np.ones(g.shape))
    assert np.allclose(nonlinear_substep(f, 1.0, 0.5).values, 2.0, rtol=1e-15)
    # general alpha: u (1 - alpha dt u^alpha)^(-1/alpha) solves u' = u^(1+alpha)
    sol = integrate.solve_ivp(lambda t, y: y ** 1.5, (0, 0.3), [0.7], rtol=1e-12, atol=1e-14)
    out = nonlinear_substep(Field(g, np.full(g.shape, 0.7)), 0.5, 0.3).values
    assert out[0] == pytest.approx(sol.y[0, -1], rel=1e-9)


@pytest.mark.parametrize("dt", [1.0, 1.5])
def test_substep_signals_blowup(dt):
    g = Grid(1, 2.0, 8)
    with pytest.raises(BlowupSignal) as info:
        nonlinear_substep(Field(g, np.ones(g.shape)), 1.0, dt)
    assert info.value.singularity_time == pytest.approx(1.0)


def test_substep_keeps_oddness(rng):
    g = Grid(2, 2.0, 16)
    f = odd_extend(g, rng.random(g.half_shape))
    out = nonlinear_substep(f, 0.7, 0.1)
    assert np.array_equal(reflect_xn(out.values), -out.values)
    assert out.symmetry is Symmetry.ODD
    with pytest.raises(ValueError):
        nonlinear_substep(f, 0.7, 0.0)


def test_strang_reduces_to_linear_on_zero_nonlinearity():
    g = Grid(1, 16.0, 256)
    zero = odd_extend(g, np.zeros(g.half_shape))
    assert np.array_equal(strang_step(zero, laplacian(), 1.0, 0.3).values, zero.values)
    # tiny data: reaction is negligible, the step is the linear flow
    f = odd_extend(g, 1e-12 * canonical_bump(g))
    a = strang_step(f, laplacian(), 1.0, 0.3).values
    b = propagate_linear(f, laplacian(), 0.3).values
    assert np.max(np.abs(a - b)) <= 1e-22


def test_strang_keeps_oddness(rng):
    g = Grid(2, 8.0, 64)
    f = odd_extend(g, rng.random(g.half_shape))
    out = strang_step(f, laplacian(), 1.0, 0.05)
    assert np.array_equal(reflect_xn(out.values), -out.values)


def test_strang_second_order():
    g = Grid(1, 16.0, 512)
    u0 = odd_extend(g, canonical_bump(g))

    def run(dt, T=0.5):
        u = u0
        for _ in range(int(round(T / dt))):
            u = strang_step(u, laplacian(), 1.0, dt)
        return u.values

    ref = run(0.5 / 64)
    e1 = np.max(np.abs(run(0.5 / 8) - ref))
    e2 = np.max(np.abs(run(0.5 / 16) - ref))
    assert math.log2(e1 / e2) == pytest.approx(2.0, abs=0.2)


# -- run_simulation ----------------------------------------------------------


def test_subcritical_run_blows_up():
    res = run_simulation(cfg(0.5, 0.5, t_max=200.0))
    assert res.status is Status.BLEW_UP
    assert math.isfinite(res.t_star) and res.t_star > res.series[-1].t
    last = res.series[-1]
    assert last.sup_norm >= 1e8 or any("singularity" in n or "collapsed" in n for n in res.notes)


def test_small_supercritical_data_decay():
    res = run_simulation(cfg(1.5, eps_amplitude(1.5), t_max=200.0, record_growth=1.1))
    assert res.status is Status.DECAYED
    assert res.fitted_rate == pytest.approx(-1.0, abs=0.15)


def test_zero_data_is_trivially_decayed():
    g = Grid(1, 8.0, 64)
    res = run_simulation(SimConfig(laplacian(), g, 1.5, np.zeros(g.half_shape), t_max=5.0))
    assert res.status is Status.DECAYED
    assert all(r.sup_norm == r.M1 == r.f_probe == 0.0 for r in res.series)


def test_series_timestamps_increase_and_run_is_deterministic():
    c = cfg(0.8, 1.0, t_max=30.0, record_every=0.5)
    a, b = run_simulation(c), run_simulation(c)
    ts = [r.t for r in a.series]
    assert all(t1 < t2 for t1, t2 in zip(ts, ts[1:]))
    assert a.to_dict() == b.to_dict()


def test_critical_alpha_never_decays():
    res = run_simulation(cfg(1.0, 0.25, t_max=100.0, record_growth=1.1))
    assert res.status is not Status.DECAYED
    assert any("beta/(N+1)" in n for n in res.notes)


def test_larger_data_blows_up_no_later():
    t_small = run_simulation(cfg(0.8, 0.5, t_max=500.0)).t_star
    t_large = run_simulation(cfg(0.8, 1.0, t_max=500.0)).t_star
    assert t_large <= t_small


def test_config_validation():
    g = Grid(1, 8.0, 64)
    half = canonical_bump(g)
    with pytest.raises(ValueError):
        SimConfig(laplacian(), g, 1.0, -half, t_max=1.0)
    with pytest.raises(ValueError):
        SimConfig(laplacian(), g, 1.0, half[:-1], t_max=1.0)
    with pytest.raises(ValueError):
        SimConfig(laplacian(), g, 0.0, half, t_max=1.0)
    with pytest.raises(ValueError):
        SimConfig(laplacian(), g, 1.0, half, t_max=1.0, dt_safety=1.0)
    with pytest.raises(ValueError):
        SimConfig(laplacian(), g, 1.0, half, t_max=1.0, odd_solver="spline")


def test_probe_truncation_is_recorded():
    g = Grid(1, 16.0, 512)
    res = run_simulation(cfg(1.5, 0.05, grid=g, t_max=100.0))
    assert any("probe" in n for n in res.notes)
    assert math.isnan(res.series[-1].f_probe)


def test_serialization(tmp_path):
    res = run_simulation(cfg(0.5, 0.5, t_max=20.0))
    res.write_json(tmp_path / "r.json")
    res.write_csv(tmp_path / "s.csv")
    d = json.loads((tmp_path / "r.json").read_text())
    assert d["status"] == "BlewUp" and d["config"]["alpha"] == 0.5
    assert d["config"]["dt_safety"] == 0.2 and d["config"]["blowup_threshold"] == 1e8
    header = (tmp_path / "s.csv").read_text().splitlines()[0]
    assert header == "t,sup_norm,M1,f_probe,dt"


# -- comparison --------------------------------------------------------------


def test_comparison_identical_and_doubled():
    g = Grid(1, 64.0, 2048)
    c1 = cfg(0.5, 0.5, grid=g, t_max=10.0)
    rep = comparison_check(c1, c1, [1.0, 2.0, 4.0])
    assert rep.worst == 0.0 and rep.passed
    c2 = c1.with_data(2 * c1.initial_half_data)
    rep = comparison_check(c1, c2, [0.5, 1.0, 2.0, 3.0])
    assert rep.passed


def test_nonnegativity_until_blowup():
    res = run_simulation(cfg(0.5, 0.5, t_max=100.0, record_every=0.5), keep_states=True)
    assert res.status is Status.BLEW_UP
    assert nonnegativity_margin(res) >= -1e-12
    # states well before the trigger are included: t = 13.0 already has sup in the hundreds
    assert max(float(np.max(f.values)) for t, f in res.states.items() if t < res.t_star - 0.01) > 100


# -- probe bounds ------------------------------------------------------------


def test_probe_bounds_supercritical():
    c = cfg(1.5, eps_amplitude(1.5), t_max=100.0)
    rep = probe_lower_and_upper(c, window=(10.0, 100.0))
    assert rep.run_status != "BlewUp"
    assert rep.ceiling_respected
    assert max(rep.shifted_normalized) < 1.0
    assert all(v > 0 for v in rep.lower_normalized)


def test_probe_bounds_subcritical_window():
    c = cfg(0.5, 0.5, t_max=200.0)
    rep = probe_lower_and_upper(c, window=(10.0, 100.0))
    assert rep.run_status == "BlewUp"
    assert rep.crossing_time is not None and rep.t_star <= rep.crossing_time
    assert rep.consistent


def test_probe_gamma_scaling():
    c = cfg(1.5, eps_amplitude(1.5), t_max=100.0)
    run = run_simulation(c)
    full = probe_lower_and_upper(c, gamma=1.0, window=(50.0, 200.0), run=run)
    half = probe_lower_and_upper(c, gamma=0.5, window=(50.0, 200.0), run=run)
    expected = half.C1 / full.C1
    observed = half.lower_normalized[-1] / full.lower_normalized[-1]
    assert observed == pytest.approx(expected, rel=0.1)


# -- supersolution -----------------------------------------------------------


def test_g_closed_form_against_ode():
    alpha, beta, N, C, D = 1.5, 2.0, 1, 0.1, 3.0
    rate = alpha * (N + 1) / beta

    def rhs(t, g):
        return (C * D) ** alpha * g ** (1 + alpha) / (1 + t) ** rate

    sol = integrate.solve_ivp(rhs, (0, 50), [1.0], dense_output=True, rtol=1e-11, atol=1e-13)
    for t in (0.0, 1.0, 10.0, 50.0):
        assert supersolution_g(t, alpha, beta, N, C, D) == pytest.approx(sol.sol(t)[0], rel=1e-8)


def test_g_limits():
    assert supersolution_g(0.0, 1.5, 2.0, 1, 0.1, 3.0) == 1.0
    assert supersolution_g(1e6, 1.5, 2.0, 1, 0.1, 1e-14) == pytest.approx(1.0, abs=1e-12)
    ts = np.array([0.0, 1.0, 10.0, 100.0])
    g = supersolution_g(ts, 1.5, 2.0, 1, 0.1, 3.0)
    assert np.all(np.diff(g) > 0)


def test_g_at_threshold_is_unbounded():
    C = 0.1
    eps = epsilon_star(1.5, 2.0, 1, C)
    big = [supersolution_g(t, 1.5, 2.0, 1, C, eps) for t in (1e2, 1e4, 1e8)]
    assert big[0] < big[1] < big[2] and big[2] > 1e2
    assert supersolution_g(1e12, 1.5, 2.0, 1, C, 0.9 * eps) < 10


def test_epsilon_star_formula_and_errors():
    # (1/C) ((alpha(N+1) - beta) / (alpha beta))^(1/alpha)
    assert epsilon_star(1.5, 2.0, 1, 0.2) == pytest.approx(5 * (1 / 3) ** (2 / 3), rel=1e-14)
    with pytest.raises(ValueError):
        epsilon_star(1.0, 2.0, 1, 0.2)
    with pytest.raises(ValueError):
        supersolution_g(1.0, 0.5, 2.0, 1, 0.2, 1.0)


def test_supersolution_check_small_bump():
    c = cfg(1.5, eps_amplitude(1.5, t_max=50.0), t_max=50.0)
    rep = supersolution_check(c)
    assert rep.passed, rep.worst
    assert rep.data_norm < rep.epsilon_star


def test_supersolution_check_near_critical():
    c = cfg(1.1, eps_amplitude(1.1, t_max=50.0), t_max=50.0)
    rep = supersolution_check(c)
    assert rep.passed
    assert rep.epsilon_star < epsilon_star(1.5, 2.0, 1, rep.C_decay)


def test_supersolution_zero_data():
    g = Grid(1, 8.0, 64)
    rep = supersolution_check(SimConfig(laplacian(), g, 1.5, np.zeros(g.half_shape), t_max=5.0))
    assert rep.passed and rep.worst == 0.0


def test_supersolution_precondition():
    with pytest.raises(ValueError):
        supersolution_check(cfg(1.5, 5.0, t_max=10.0))


# -- first moment ------------------------------------------------------------


def test_linear_only_run_keeps_M1():
    res = run_simulation(cfg(1.5, 1.0, t_max=20.0, nonlinear=False))
    M = np.array([r.M1 for r in res.series])
    assert np.max(np.abs(M - M[0])) / M[0] <= 1e-8
    assert moment_monotonicity(res).passed


def test_M1_nondecreasing_and_convergent_for_decay():
    res = run_simulation(cfg(1.5, eps_amplitude(1.5), t_max=200.0, record_growth=1.1), keep_states=True)
    rep = moment_monotonicity(res)
    assert res.status is Status.DECAYED
    assert rep.passed and rep.nondecreasing and rep.bounded and rep.symmetry_ok


def test_even_perturbation_is_flagged():
    res = run_simulation(cfg(1.5, 0.1, t_max=5.0), keep_states=True)
    t = sorted(res.states)[-1]
    f = res.states[t]
    even = np.exp(-f.grid.axis**2)
    res.states[t] = f.with_values(f.values + 1e-3 * even)
    rep = moment_monotonicity(res)
    assert not rep.symmetry_ok and not rep.passed
    assert rep.even_part_M1 <= 1e-15
