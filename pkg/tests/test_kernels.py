import math
import warnings

import numpy as np
import pytest
from scipy import special, stats

from fujita.fields import Field, Grid, reflect_all, reflect_xn
from fujita.kernels import (
    AliasingWarning,
    check_monotone_in_xN,
    convolve_preserves_radial_monotone,
    halfspace_kernel,
    heat_kernel_closed_form,
    is_even_nonincreasing,
    kernel_from_symbol,
    lattice_convolve,
    poisson_series_kernel,
    poisson_tail,
    random_even_step_kernel,
    suggest_box,
)
from fujita.symbols import convolution, fractional_laplacian, gaussian_kernel, laplacian, normalize_kernel


def test_heat_snapshot_matches_closed_form():
    g = Grid(1, 40.0, 2048)
    snap = kernel_from_symbol(laplacian(), 1.0, g)
    oracle = (4 * math.pi) ** -0.5 * np.exp(-g.axis**2 / 4)
    assert np.max(np.abs(snap.values.values - oracle)) <= 1e-8
    assert snap.dirac_weight == 0.0 and not snap.warnings


def test_heat_snapshot_2d():
    g = Grid(2, 20.0, 256)
    snap = kernel_from_symbol(laplacian(), 0.5, g)
    oracle = heat_kernel_closed_form(0.5, np.stack(g.coords(), axis=-1), 2)
    assert np.max(np.abs(snap.values.values - oracle)) <= 1e-8


@pytest.mark.filterwarnings("ignore::fujita.kernels.AliasingWarning")
@pytest.mark.parametrize("N", [1, 2])
def test_snapshot_mass_and_symmetry(N):
    g = Grid(N, 16.0, 128)
    for s in (laplacian(), fractional_laplacian(1.2), convolution(gaussian_kernel(g, 1.0))):
        snap = kernel_from_symbol(s, 1.0, g)
        assert abs(snap.total_mass() - 1.0) <= 1e-10
        v = snap.values.values
        assert np.array_equal(v, reflect_xn(v))
        if N > 1:
            assert np.array_equal(v, reflect_all(reflect_xn(v)))
        assert np.min(v) >= -1e-12


def test_convolution_snapshot_matches_poisson_series():
    g = Grid(1, 20.0, 512)
    J = gaussian_kernel(g, 1.0)
    snap = kernel_from_symbol(convolution(J), 0.1, g)
    series = poisson_series_kernel(J, 0.1, 20)
    assert snap.dirac_weight == series.dirac_weight == math.exp(-0.1)
    assert np.max(np.abs(snap.values.values - series.values.values)) <= 1e-10


def test_poisson_series_small_time_and_tail():
    g = Grid(1, 20.0, 256)
    J = gaussian_kernel(g, 1.0)
    s = poisson_series_kernel(J, 1e-6, 3)
    assert s.dirac_weight == pytest.approx(1.0, abs=1e-6)
    assert s.values.mass() < 2e-6
    b = poisson_series_kernel(J, 0.1, 20).truncation_bound
    assert b < 1e-25
    assert b == pytest.approx(stats.poisson.sf(20, 0.1), rel=1e-6)
    assert poisson_tail(2.0, 5) == pytest.approx(stats.poisson.sf(5, 2.0), rel=1e-10)


def test_poisson_series_errors():
    g = Grid(1, 4.0, 32)
    J = gaussian_kernel(g, 1.0)
    with pytest.raises(ValueError):
        poisson_series_kernel(J, 0.1, 0)
    with pytest.raises(ValueError):
        poisson_series_kernel(J.with_values(-J.values), 0.1, 2)


def test_heat_closed_form_values():
    assert heat_kernel_closed_form(1.0, 0.0, 1) == pytest.approx(0.28209479, abs=1e-8)
    assert heat_kernel_closed_form(1.0, [0.0, 0.0], 2) == pytest.approx(0.07957747, abs=1e-8)
    assert heat_kernel_closed_form(0.3, 1.7, 1) == heat_kernel_closed_form(0.3, -1.7, 1)
    with pytest.raises(ValueError):
        heat_kernel_closed_form(0.0, 0.0, 1)


def test_kernel_time_must_be_positive():
    with pytest.raises(ValueError):
        kernel_from_symbol(laplacian(), 0.0, Grid(1, 4.0, 32))


def test_aliasing_warning_on_coarse_grid():
    with pytest.warns(AliasingWarning):
        snap = kernel_from_symbol(laplacian(), 0.01, Grid(1, 20.0, 64))
    assert snap.warnings


def test_halfspace_kernel():
    g = Grid(1, 32.0, 2048)
    snap = kernel_from_symbol(laplacian(), 1.0, g)
    assert halfspace_kernel(snap, [1.0], [0.0]) == 0.0
    expected = (4 * math.pi) ** -0.5 * (1 - math.exp(-1))
    assert halfspace_kernel(snap, [1.0], [1.0]) == pytest.approx(expected, abs=1e-8)
    rng = np.random.default_rng(1)
    for x, y in rng.uniform(0, 6, size=(50, 2)):
        assert halfspace_kernel(snap, [x], [y]) >= -1e-12
    with pytest.raises(ValueError):
        halfspace_kernel(snap, [-1.0], [1.0])


def test_monotone_heat_and_fractional():
    assert check_monotone_in_xN(kernel_from_symbol(laplacian(), 1.0, Grid(2, 16.0, 128))).monotone
    assert check_monotone_in_xN(kernel_from_symbol(fractional_laplacian(1.0), 1.0, Grid(1, 64.0, 4096))).monotone


def test_two_bump_kernel_not_monotone():
    g = Grid(1, 32.0, 1024)
    J = np.exp(-((g.axis - 5) ** 2) / 0.5) + np.exp(-((g.axis + 5) ** 2) / 0.5)
    J = normalize_kernel(g, 0.5 * (J + reflect_xn(J)))
    snap = kernel_from_symbol(convolution(J), 0.5, g)
    rep = check_monotone_in_xN(snap)
    assert not rep.monotone and rep.worst_increase > 1e-3


def _boxes(n, half_width):
    x = np.arange(n) - n // 2
    return (np.abs(x) <= half_width).astype(float) / 2


def test_box_convolution_gives_triangle():
    f = _boxes(64, 8)
    assert convolve_preserves_radial_monotone(f, f)
    tri = np.convolve(f, f)[32:96]
    assert np.argmax(tri) == 32


def test_gaussian_convolution_monotone():
    x = np.arange(128) - 64
    g1, g2 = np.exp(-(x**2) / 20.0), np.exp(-(x**2) / 50.0)
    assert convolve_preserves_radial_monotone(g1, g2)


def test_random_step_kernels_convolve_monotone():
    rng = np.random.default_rng(7)
    for _ in range(1000):
        f, g = random_even_step_kernel(rng, 64), random_even_step_kernel(rng, 64)
        assert is_even_nonincreasing(f) and is_even_nonincreasing(g)
        assert convolve_preserves_radial_monotone(f, g)


def test_radial_precondition_enforced():
    bad = np.zeros(16)
    bad[10] = 1.0
    with pytest.raises(ValueError):
        convolve_preserves_radial_monotone(bad, bad)


def test_chapman_kolmogorov_heat():
    g = Grid(1, 64.0, 2048)
    a = kernel_from_symbol(laplacian(), 0.5, g)
    b = kernel_from_symbol(laplacian(), 1.0, g)
    ab = kernel_from_symbol(laplacian(), 1.5, g)
    conv = lattice_convolve(a.values, b.values.values)
    assert np.max(np.abs(conv - ab.values.values)) <= 1e-8


def test_chapman_kolmogorov_fractional_periodic():
    # heavy tails wrap around the box, so compose with the periodic convolution
    g = Grid(1, 64.0, 2048)
    s = fractional_laplacian(1.5)
    a, b, ab = (kernel_from_symbol(s, t, g).values.values for t in (0.5, 1.0, 1.5))
    fa = np.fft.fft(np.fft.ifftshift(a))
    fb = np.fft.fft(np.fft.ifftshift(b))
    conv = g.dx * np.fft.fftshift(np.fft.ifft(fa * fb).real)
    assert np.max(np.abs(conv - ab)) <= 1e-8


def test_suggest_box():
    g = Grid(1, 64.0, 1024)
    s = suggest_box(laplacian(), 1.0, g, target=1e-10)
    # mass of the t = 1 heat kernel beyond |x| = r is erfc(r / 2)
    r_star = 2 * special.erfcinv(1e-10)
    assert abs(s.L / 2 - r_star) <= 2 * g.dx
    assert s.outside_mass < 1e-10
