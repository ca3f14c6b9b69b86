import numpy as np
import pytest

from hml.fourier import (
    DecayReport,
    SpectrumFunction,
    decay_report,
    dual_grid,
    fourier,
    hkp_closed_form,
    hkp_time_profile,
    inverse_fourier,
    moment_decay_link,
)
from hml.grid import GridFunction, make_grid, sample
from hml.morrey import MorreyParams


def slow_dft(f):
    """Direct-sum oracle for the forward transform (O(N^2), small grids)."""
    g = f.grid
    x = g.axis()
    xi = g.freq_axis()
    if g.n == 1:
        M = np.exp(-2j * np.pi * np.outer(xi, x))
        return M @ f.values * g.h
    M = np.exp(-2j * np.pi * np.outer(xi, x))
    return (M @ f.values @ M.T) * g.h**2


class TestTransform:
    @pytest.mark.parametrize("n,N", [(1, 16), (1, 64), (2, 16)])
    def test_matches_direct_sum(self, n, N):
        g = make_grid(n, 1.0, N)
        rng = np.random.default_rng(3)
        f = GridFunction(g, rng.normal(size=g.shape) + 1j * rng.normal(size=g.shape))
        S = fourier(f)
        ref = slow_dft(f)
        assert np.max(np.abs(S.values - ref)) <= 1e-12 * np.max(np.abs(ref))

    def test_indicator_sinc_oracle(self):
        # Indicator of [-1/2, 1/2) transforms to sin(pi xi)/(pi xi).  On the
        # half-open lattice the sampled indicator's cell union is centered at
        # -h/2, so the continuum oracle carries that shift as a phase; the
        # residual is the quadrature error O((pi h xi)^2 / 6).
        g = make_grid(1, 8.0, 2**13)
        f = sample(g, lambda x: ((x >= -0.5) & (x < 0.5)).astype(float))
        S = fourier(f)
        xi = g.freq_axis()
        keep = np.abs(xi) <= 8.0
        ref = np.sinc(xi[keep]) * np.exp(1j * np.pi * g.h * xi[keep])
        err = np.abs(S.values[keep] - ref)
        assert np.max(err / np.maximum(np.abs(ref), 1e-2)) <= 1e-3

    def test_zero_frequency_is_integral(self):
        g = make_grid(1, 2.0, 128)
        f = sample(g, lambda x: np.exp(-(x**2)))
        S = fourier(f)
        assert S.values[g.N // 2] == pytest.approx(f.values.sum() * g.h, rel=1e-12)

    def test_round_trip(self):
        g = make_grid(2, 1.0, 32)
        rng = np.random.default_rng(11)
        f = GridFunction(g, rng.normal(size=g.shape))
        back = inverse_fourier(fourier(f))
        assert np.max(np.abs(back.values - f.values)) <= 1e-12 * np.max(np.abs(f.values))

    @pytest.mark.parametrize("seed", [0, 1, 2])
    def test_parseval(self, seed):
        g = make_grid(1, 2.0, 256)
        rng = np.random.default_rng(seed)
        f = GridFunction(g, rng.normal(size=g.shape) + 1j * rng.normal(size=g.shape))
        S = fourier(f)
        e_space = np.sum(np.abs(f.values) ** 2) * g.h**g.n
        e_freq = np.sum(np.abs(S.values) ** 2) * (1.0 / (2 * g.L)) ** g.n
        assert e_freq / e_space == pytest.approx(1.0, abs=1e-9)

    def test_dual_grid_axis_matches_freqs(self):
        g = make_grid(1, 4.0, 64)
        d = dual_grid(g)
        assert np.allclose(d.axis(), g.freq_axis())

    def test_spectrum_rejects_nonfinite(self):
        g = make_grid(1, 1.0, 8)
        with pytest.raises(ValueError):
            SpectrumFunction(g, np.full(8, np.nan))


class TestDecayReport:
    def _gaussian(self, g):
        return sample(g, lambda x: np.exp(-np.pi * x**2))

    def test_rejects_zero_function(self):
        g = make_grid(1, 16.0, 1024)
        f = GridFunction(g, np.zeros(g.N))
        with pytest.raises(ValueError):
            decay_report(f, MorreyParams(1.0, 1.0))

    def test_rejects_homogeneous_for_large_lam(self):
        g = make_grid(1, 16.0, 1024)
        with pytest.raises(ValueError):
            decay_report(self._gaussian(g), MorreyParams(1.0, 2.0), weight="homogeneous")

    def test_mean_violator_flagged(self):
        # nonzero integral with a positive homogeneous exponent: law broken at 0
        g = make_grid(1, 16.0, 1024)
        rep = decay_report(self._gaussian(g), MorreyParams(2 / 3, 2 / 3), weight="homogeneous")
        assert rep.flag_violation
        assert rep.exponent == pytest.approx(0.5)

    def test_mean_zero_derivative_slope(self):
        # f = d/dx gaussian has fhat ~ xi near 0: slope about 1, no violation
        g = make_grid(1, 16.0, 1024)
        f = sample(g, lambda x: -2 * np.pi * x * np.exp(-np.pi * x**2))
        rep = decay_report(f, MorreyParams(2 / 3, 2 / 3), weight="homogeneous")
        assert not rep.flag_violation
        assert rep.slope == pytest.approx(1.0, abs=0.1)
        assert np.isfinite(rep.C)

    def test_inhomogeneous_constant_finite_for_block(self):
        g = make_grid(1, 16.0, 1024)
        f = sample(g, lambda x: ((x >= 0) & (x < 1)).astype(float))
        rep = decay_report(f, MorreyParams(1.0, 1.0), weight="inhomogeneous")
        assert np.isfinite(rep.C)
        assert rep.exponent == 0.0
        # weight is identically one, so C is the spectral sup, bounded by L1 mass
        assert rep.C <= 1.0 + 1e-9

    def test_annuli_dyadic_and_sups_nonnegative(self):
        g = make_grid(1, 16.0, 1024)
        rep = decay_report(self._gaussian(g), MorreyParams(1.0, 1.0), weight="inhomogeneous")
        for lo, hi, sup in rep.annuli:
            assert hi == pytest.approx(2 * lo)
            assert sup >= 0

    def test_json_shape(self):
        g = make_grid(1, 16.0, 1024)
        rep = decay_report(self._gaussian(g), MorreyParams(1.0, 1.0), weight="inhomogeneous")
        blob = rep.to_json()
        assert set(blob) == {"weight", "annuli", "C", "slope", "slope_ci"}
        assert set(blob["annuli"][0]) == {"lo", "hi", "sup"}


class TestMomentDecayLink:
    def test_mean_detected(self):
        g = make_grid(1, 8.0, 512)
        f = sample(g, lambda x: np.exp(-np.pi * x**2))
        rep = moment_decay_link(f, lam=1.0, max_order=0)
        assert not rep["pass"]
        assert rep["orders"][0]["estimate"] == pytest.approx(1.0, rel=1e-6)

    def test_zero_function_passes(self):
        g = make_grid(1, 8.0, 512)
        f = GridFunction(g, np.zeros(g.N))
        rep = moment_decay_link(f, lam=0.5, max_order=1)
        assert rep["pass"]

    def test_odd_function_mean_and_first_order(self):
        # odd gaussian derivative: mean exactly zero; first derivative of the
        # spectrum at 0 is nonzero (first moment is not zero)
        g = make_grid(1, 8.0, 512)
        f = sample(g, lambda x: -2 * np.pi * x * np.exp(-np.pi * x**2))
        rep = moment_decay_link(f, lam=0.5, max_order=1)
        orders = {tuple(r["alpha"]): r for r in rep["orders"]}
        assert orders[(0,)]["pass"]
        assert not orders[(1,)]["pass"]


class TestHkpClosedForm:
    def test_value_zero_at_zero_frequency(self):
        out = hkp_closed_form(2, 1.0, 1.0, np.array([0.0, 0.25]))
        assert out[0] == 0

    def test_probe_point_magnitude_k1(self):
        # at xi = 1/(4 eps), j=1: uhat factor magnitude 4/pi, sine factor 1
        out = hkp_closed_form(1, 1.0, 1.0, np.array([0.25]))
        assert np.abs(out[0]) == pytest.approx(4 / np.pi, rel=1e-12)

    def test_probe_sine_zero_for_k2_j1(self):
        # the second sine factor vanishes at xi = 1/(4 eps) when k = 2
        out = hkp_closed_form(2, 1.0, 1.0, np.array([0.25]))
        assert np.abs(out[0]) <= 1e-15

    @pytest.mark.parametrize("lam", [1.0, 2.0])
    def test_epsilon_power_law_exact(self, lam):
        # |ahat_eps(1/(4 eps))| = C * eps^{n(1-1/lam)} exactly
        vals = []
        for eps in [1.0, 2.0, 4.0, 8.0]:
            v = hkp_closed_form(1, lam, eps, np.array([1.0 / (4 * eps)]))
            vals.append(np.abs(v[0]))
        slopes = np.diff(np.log(vals)) / np.diff(np.log([1.0, 2.0, 4.0, 8.0]))
        assert np.allclose(slopes, 1.0 - 1.0 / lam, atol=1e-12)

    def test_2d_requires_cross_section(self):
        with pytest.raises(ValueError):
            hkp_closed_form(1, 1.0, 1.0, (np.array([0.0]), np.array([0.25])), n=2)

    def test_time_profile_rejects_bad_order(self):
        with pytest.raises(ValueError):
            hkp_time_profile(0, np.array([0.1]))
