import dataclasses

import numpy as np
import pytest

from hml.atoms import (
    Atom,
    _smooth_ramp,
    bump_profile,
    make_smooth_atom,
    make_suitable_cutoff,
    project_moments,
)
from hml.grid import Cube, GridFunction, dyadic_family, make_grid
from hml.maximal import make_ladder, mollify
from hml.morrey import MorreyParams
from hml.psido import (
    KernelSample,
    apply_symbol,
    blowup_experiment,
    builtin_symbols,
    frequency_cutoff,
    japanese_bracket,
    kernel_decay_check,
    kernel_sample,
    modulated_multiplier,
    operator_norm_probe,
    riesz_ratio,
    smooth_multiplier,
    symbol_from_string,
    verify_symbol_class,
)


def bracket_squared_gaussian(x):
    """Closed form of the order-2 bracket multiplier on exp(-pi x^2)."""
    return np.exp(-np.pi * x**2) * (1.0 - x**2 + 1.0 / (2.0 * np.pi))


def bessel_kernel(z):
    """Closed form of the convolution kernel of the order -2 bracket."""
    return np.pi * np.exp(-2.0 * np.pi * np.abs(z))


@pytest.fixture(scope="module")
def g1():
    return make_grid(n=1, N=512, L=4.0)


@pytest.fixture(scope="module")
def gauss(g1):
    return GridFunction(g1, np.exp(-np.pi * g1.axis() ** 2))


class TestSymbolFactories:
    def test_identity_symbol_is_one(self, g1):
        sym = japanese_bracket(0.0)
        vals = sym.evaluate(0.3, g1.freq_axis())
        assert sym.x_independent
        assert sym.order == 0.0
        assert np.max(np.abs(vals - 1.0)) == 0.0

    def test_bracket_values(self):
        sym = japanese_bracket(2.0)
        xi = np.array([0.0, 1.0, -3.0])
        expected = 1.0 + xi**2
        assert np.allclose(sym.evaluate(0.0, xi), expected, rtol=0, atol=1e-14)

    def test_riesz_bounded_and_odd(self, g1):
        sym = riesz_ratio(1)
        xi = g1.freq_axis()
        vals = np.asarray(sym.evaluate(0.0, xi))
        assert np.max(np.abs(vals)) <= 1.0
        flipped = np.asarray(sym.evaluate(0.0, -xi))
        assert np.allclose(vals, -flipped, atol=1e-15)

    def test_catalog_names(self):
        assert sorted(builtin_symbols()) == [
            "freqcutoff",
            "jbracket",
            "modmult",
            "rieszratio",
            "smoothmult",
        ]

    @pytest.mark.parametrize("t", [0.0, -0.5, 2.0, 0.3])
    def test_frequency_cutoff_rejects_bad_scale(self, g1, t):
        phi = make_suitable_cutoff(g1)
        with pytest.raises(ValueError):
            frequency_cutoff(phi, t)


class TestSymbolFromString:
    def test_valid_specs(self, g1):
        assert symbol_from_string("jbracket:m=2", g1).order == 2.0
        assert symbol_from_string("rieszratio:j=1", g1).order == 0.0
        assert "t=0.25" in symbol_from_string("freqcutoff:t=0.25", g1).name
        assert not symbol_from_string("smoothmult", g1).x_independent
        assert not symbol_from_string("modmult:j=1", g1).x_independent

    def test_unknown_name(self, g1):
        with pytest.raises(ValueError, match="unknown symbol"):
            symbol_from_string("laplace", g1)

    def test_unknown_parameter(self, g1):
        with pytest.raises(ValueError, match="unknown parameters"):
            symbol_from_string("jbracket:q=2", g1)

    def test_malformed_parameter(self, g1):
        with pytest.raises(ValueError, match="malformed"):
            symbol_from_string("jbracket:m", g1)

    def test_non_numeric_parameter(self, g1):
        with pytest.raises(ValueError, match="non-numeric"):
            symbol_from_string("jbracket:m=abc", g1)


class TestApplySymbol:
    def test_identity(self, g1, gauss):
        out = apply_symbol(japanese_bracket(0.0), gauss)
        assert np.max(np.abs(out.values - gauss.values)) <= 1e-10

    def test_bracket_squared_gaussian_oracle(self, g1, gauss):
        out = apply_symbol(japanese_bracket(2.0), gauss)
        expected = bracket_squared_gaussian(g1.axis())
        rel = np.max(np.abs(out.values - expected)) / np.max(np.abs(expected))
        assert rel <= 1e-6

    def test_linearity(self, g1, gauss):
        rng = np.random.default_rng(5)
        v = GridFunction(g1, bump_profile(g1.axis() / 2.0) * rng.normal(size=g1.N))
        sym = riesz_ratio(1)
        lhs = apply_symbol(sym, GridFunction(g1, 2.0 * gauss.values - 3.0 * v.values))
        rhs = 2.0 * apply_symbol(sym, gauss).values - 3.0 * apply_symbol(sym, v).values
        scale = np.max(np.abs(rhs))
        assert np.max(np.abs(lhs.values - rhs)) <= 1e-10 * scale

    def test_fast_path_matches_quadrature(self, g1, gauss):
        sym = japanese_bracket(1.0)
        forced = dataclasses.replace(sym, x_independent=False)
        fast = apply_symbol(sym, gauss)
        slow = apply_symbol(forced, gauss)
        rel = np.max(np.abs(fast.values - slow.values)) / np.max(np.abs(fast.values))
        assert rel <= 1e-6

    def test_smooth_multiplier_is_pointwise_product(self, g1, gauss):
        psi = GridFunction(g1, bump_profile(g1.axis() / 2.0))
        out = apply_symbol(smooth_multiplier(psi), gauss)
        expected = psi.values * gauss.values
        rel = np.max(np.abs(out.values - expected)) / np.max(np.abs(gauss.values))
        assert rel <= 1e-6

    def test_real_input_gives_real_output(self, g1, gauss):
        out = apply_symbol(japanese_bracket(2.0), gauss)
        assert not np.iscomplexobj(out.values)

    @pytest.mark.parametrize("t", [1.0, 0.5, 0.25])
    def test_frequency_cutoff_equals_mollification(self, g1, gauss, t):
        phi = make_suitable_cutoff(g1)
        out = apply_symbol(frequency_cutoff(phi, t), gauss)
        ref = mollify(gauss, phi, t)
        assert np.max(np.abs(out.values - ref.values)) <= 1e-8

    def test_threaded_quadrature_matches_serial(self, g1, gauss, monkeypatch):
        sym = modulated_multiplier(
            GridFunction(g1, bump_profile(g1.axis() / 2.0)), 1
        )
        serial = apply_symbol(sym, gauss)
        monkeypatch.setenv("HML_THREADS", "4")
        threaded = apply_symbol(sym, gauss)
        assert np.max(np.abs(serial.values - threaded.values)) == 0.0

    def test_two_dimensional_identity_and_product(self):
        g = make_grid(n=2, N=32, L=2.0)
        x = g.axis()
        u = GridFunction(g, np.outer(np.exp(-np.pi * x**2), np.exp(-np.pi * x**2)))
        out = apply_symbol(japanese_bracket(0.0), u)
        assert np.max(np.abs(out.values - u.values)) <= 1e-10
        psi = GridFunction(g, np.outer(bump_profile(x), bump_profile(x)))
        prod = apply_symbol(smooth_multiplier(psi), u)
        rel = np.max(np.abs(prod.values - psi.values * u.values))
        assert rel <= 1e-6 * np.max(np.abs(u.values))


class TestVerifySymbolClass:
    SAMPLES = [(0.3, xi) for xi in (0.5, 1.0, 2.0, 4.0, 8.0, 16.0)]

    def test_bracket_within_declared_class(self):
        report = verify_symbol_class(japanese_bracket(1.5), 2, 2, self.SAMPLES)
        assert report["passed"]
        assert report["flagged"] == []
        assert report["max_constant"] < 10.0

    def test_underdeclared_order_is_flagged(self):
        bad = dataclasses.replace(japanese_bracket(1.0), order=0.0)
        report = verify_symbol_class(bad, 0, 0, self.SAMPLES)
        assert not report["passed"]
        entry = report["per_index"]["a=(0,) b=(0,)"]
        assert entry["flagged"]
        assert abs(entry["growth_slope"] - 1.0) <= 0.05

    def test_riesz_bounded_constants(self):
        report = verify_symbol_class(riesz_ratio(1), 0, 1, self.SAMPLES)
        assert report["passed"]

    def test_depth_limit(self):
        with pytest.raises(ValueError, match="depth"):
            verify_symbol_class(japanese_bracket(1.0), 4, 0, self.SAMPLES)

    def test_empty_samples(self):
        with pytest.raises(ValueError, match="nonempty"):
            verify_symbol_class(japanese_bracket(1.0), 1, 1, [])


class TestKernelSample:
    def test_translation_invariance(self, g1):
        zs = [0.5, 0.75, 1.0]
        pairs = [(x + z, x) for z in zs for x in (-1.0, -0.25, 0.5, 1.25)]
        sample = kernel_sample(riesz_ratio(1), g1, pairs)
        vals = sample.values.reshape(len(zs), 4)
        spread = np.max(np.abs(vals - vals[:, :1]))
        assert spread <= 1e-8 * np.max(np.abs(vals))

    def test_bessel_kernel_oracle(self):
        g = make_grid(n=1, N=1024, L=8.0)
        zs = np.array([0.125, 0.25, 0.375, 0.5, 0.75])
        pairs = [(z, 0.0) for z in zs]
        sample = kernel_sample(japanese_bracket(-2.0), g, pairs, eps=1.0 / 16.0)
        expected = bessel_kernel(zs)
        rel = np.max(np.abs(sample.values - expected) / expected)
        assert rel <= 1e-3

    @pytest.mark.parametrize("factory", [riesz_ratio, None])
    def test_order_zero_kernel_decay(self, g1, factory):
        if factory is None:
            chi = GridFunction(
                g1, _smooth_ramp((0.75 * g1.L - np.abs(g1.axis())) / (0.25 * g1.L))
            )
            sym = modulated_multiplier(chi, 1)
        else:
            sym = factory(1)
        zs = np.geomspace(0.25, 2.0, 9)
        sample = kernel_sample(sym, g1, [(z, 0.0) for z in zs])
        report = kernel_decay_check(sample, M=0, m=0.0, rho=1.0)
        assert report["passed"]
        assert report["slope"] <= -1.0 + 0.3

    def test_pairs_too_close_rejected(self, g1):
        with pytest.raises(ValueError, match="4h"):
            kernel_sample(riesz_ratio(1), g1, [(g1.h, 0.0)])

    def test_unresolvable_taper_rejected(self):
        g = make_grid(n=2, N=128, L=4.0)
        with pytest.raises(ValueError, match="eps too small"):
            kernel_sample(riesz_ratio(1), g, [((1.0, 0.0), (0.0, 0.0))])

    def test_far_pairs_marked_unresolved(self, g1):
        sample = kernel_sample(riesz_ratio(1), g1, [(3.0, -3.0), (0.5, 0.0)])
        assert sample.resolved.tolist() == [False, True]

    def test_coincident_pair_rejected(self, g1):
        with pytest.raises(ValueError):
            KernelSample(
                "x",
                0.125,
                1,
                np.array([[0.5]]),
                np.array([[0.5]]),
                np.array([1.0 + 0j]),
                np.array([True]),
            )

    def test_two_dimensional_sample_finite(self):
        g = make_grid(n=2, N=128, L=2.0)
        pairs = [((0.5, 0.0), (0.0, 0.0)), ((0.0, 0.75), (0.0, 0.0))]
        sample = kernel_sample(riesz_ratio(2), g, pairs)
        assert np.all(np.isfinite(sample.values))
        assert sample.n == 2

    def test_decay_check_needs_three_pairs(self, g1):
        sample = kernel_sample(riesz_ratio(1), g1, [(0.5, 0.0), (1.0, 0.0)])
        with pytest.raises(ValueError, match="three"):
            kernel_decay_check(sample)


@pytest.fixture(scope="module")
def probe_setup():
    g = make_grid(n=1, N=2048, L=4.0)
    p = MorreyParams(q=2.0 / 3.0, lam=2.0 / 3.0)
    phi = make_suitable_cutoff(g)
    return g, p, phi


def oscillatory_corpus(g, p):
    """Moment-free cosine-bump atoms whose band scales like 1/sidelength."""
    x = g.axis()
    atoms = []
    for ell in (0.0625, 0.125, 0.25, 0.5, 1.0, 2.0):
        for theta in (0.0, 1.1):
            Q = Cube((0.0,), ell)
            u = (x - Q.center[0]) / ell
            vals = bump_profile(u / 0.475) * np.cos(2.0 * np.pi * 4.0 * u + theta)
            f = project_moments(GridFunction(g, vals), Q, 0)
            sup = float(np.max(np.abs(f.values)))
            scale = Q.volume ** (-1.0 / p.lam) / sup
            atoms.append(Atom("smooth", Q, GridFunction(g, f.values * scale), 0, p))
    return atoms


class TestOperatorNormProbe:
    def test_identity_ratios_are_one(self, probe_setup):
        g, p, phi = probe_setup
        corpus = oscillatory_corpus(g, p)
        rep = operator_norm_probe(
            japanese_bracket(0.0), p, corpus, phi,
            make_ladder(0, 5), dyadic_family(g, -1, 4),
        )
        assert max(abs(r - 1.0) for r in rep["ratios"]) <= 1e-8

    def test_modulated_multiplier_bounded_trend(self, probe_setup):
        g, p, phi = probe_setup
        corpus = oscillatory_corpus(g, p)
        chi = GridFunction(
            g, _smooth_ramp((0.75 * g.L - np.abs(g.axis())) / (0.25 * g.L))
        )
        rep = operator_norm_probe(
            modulated_multiplier(chi, 1), p, corpus, phi,
            make_ladder(0, 5), dyadic_family(g, -1, 4),
        )
        assert abs(rep["trend_slope"]) <= 0.1
        assert not rep["growth_flagged"]

    def test_moment_destruction_flagged_in_global_norm(self, probe_setup):
        g, p, phi = probe_setup
        x = g.axis()
        vals = np.zeros(g.N)
        t = x / (g.L / 2.0)
        inside = np.abs(t) < 1
        vals[inside] = np.exp(1.0 / (t[inside] ** 2 - 1.0) + 1.0) * np.sin(
            np.pi * x[inside]
        )
        psi = GridFunction(g, vals)
        corpus = [
            make_smooth_atom(p, Cube((0.0,), ell), seed, g)
            for ell in (0.0625, 0.125, 0.25, 0.5, 1.0, 2.0)
            for seed in (0, 1)
        ]
        rep = operator_norm_probe(
            smooth_multiplier(psi), p, corpus, phi,
            make_ladder(-2, 5), dyadic_family(g, -1, 4), local=False,
        )
        assert rep["trend_slope"] >= 0.3
        assert rep["growth_flagged"]

    def test_empty_corpus_rejected(self, probe_setup):
        g, p, phi = probe_setup
        with pytest.raises(ValueError, match="nonempty"):
            operator_norm_probe(
                japanese_bracket(0.0), p, [], phi,
                make_ladder(0, 5), dyadic_family(g, 0, 4),
            )


class TestBlowupExperiment:
    def test_half_order_blowup(self):
        rep = blowup_experiment(0.5, 2, 1.0, [1.0, 0.5, 0.25])
        assert abs(rep["bound_slope"] - (-0.5)) <= 1e-6
        for ratio, expected in zip(rep["bound_ratios"], rep["expected_ratio"]):
            assert abs(ratio - expected) <= 1e-6
            assert abs(expected - 2.0**0.5) <= 1e-12
        assert rep["measured_slope"] <= -0.2

    def test_order_zero_control_is_flat(self):
        rep = blowup_experiment(0.0, 2, 1.0, [1.0, 0.5, 0.25])
        assert abs(rep["bound_slope"]) <= 1e-10
        assert rep["measured_slope"] >= -0.15

    def test_rejects_bad_exponents(self):
        with pytest.raises(ValueError, match="lam"):
            blowup_experiment(0.5, 2, 1.25, [1.0, 0.5])
        with pytest.raises(ValueError, match="nonnegative"):
            blowup_experiment(-0.5, 2, 1.0, [1.0, 0.5])

    def test_rejects_bad_scales(self):
        with pytest.raises(ValueError, match="two scales"):
            blowup_experiment(0.5, 2, 1.0, [1.0])
        with pytest.raises(ValueError, match="powers of two"):
            blowup_experiment(0.5, 2, 1.0, [1.0, 0.3])
        with pytest.raises(ValueError, match="powers of two"):
            blowup_experiment(0.5, 2, 1.0, [2.0, 1.0])

    def test_rejects_probe_on_sine_zero(self):
        with pytest.raises(ValueError, match="vanishes"):
            blowup_experiment(0.5, 2, 1.0, [1.0, 0.5], j=1)

    def test_rejects_unresolvable_probe(self):
        with pytest.raises(ValueError, match="resolve"):
            blowup_experiment(0.5, 2, 1.0, [1.0, 2.0 ** (-9)])


class TestRoughBlockTail:
    """Order-0 symbols map compactly supported blocks to rapidly decaying images.

    A rough block is supported in a single cube Q.  Applying an order-0
    multiplier smears it, but the image must still decay away from Q: on
    dyadic shells outside 2Q the sup should fall with log-log slope at
    least n/q + 1/2 below zero.  Only the existence of such a rate is
    asserted; the measured exponent itself is reported, not pinned.
    """

    @pytest.fixture()
    def block_image(self):
        from hml.atoms import make_rough_block

        g = make_grid(1, 8.0, 1024)
        p = MorreyParams(q=1.0, lam=2.0)
        block = make_rough_block(p, Cube((0.0,), 1.0), seed=3, g=g)
        image = apply_symbol(riesz_ratio(1), block.data)
        return g, p, block, image

    @staticmethod
    def shell_sups(g, image, radii):
        dist = np.abs(g.axis())
        sups = []
        for lo, hi in zip(radii[:-1], radii[1:]):
            mask = (dist >= lo) & (dist < hi)
            sups.append(float(np.max(np.abs(image.values[mask]))))
        return sups

    def test_tail_slope_beats_required_rate(self, block_image):
        g, p, block, image = block_image
        radii = [1.0, 2.0, 4.0, 8.0]
        sups = self.shell_sups(g, image, radii)
        # the shells must sit above the double-precision floor for the
        # slope to mean anything
        assert min(sups) > 1e-12 * float(np.max(np.abs(image.values)))
        mids = np.log([np.sqrt(lo * hi) for lo, hi in zip(radii[:-1], radii[1:])])
        slope = np.polyfit(mids, np.log(sups), 1)[0]
        required = 1 / p.q + 0.5  # n/q + 1/2 = 1.5 here
        assert required == pytest.approx(1.5)
        assert slope <= -required, f"measured tail slope {slope:.3f}"

    def test_identity_symbol_leaves_support_alone(self, block_image):
        g, p, block, _ = block_image
        image = apply_symbol(japanese_bracket(0.0), block.data)
        outside = np.abs(g.axis()) >= 1.0
        floor = 1e-12 * float(np.max(np.abs(image.values)))
        assert float(np.max(np.abs(image.values[outside]))) <= floor
