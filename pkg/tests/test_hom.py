"""Wavepacket statistics and two-photon interference tests.

The correlation pipeline is validated against direct scipy.integrate.quad
evaluation of the defining integrals for Gaussian pairs (an independent
code path from the fft-based production implementation).
"""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad

from rbcavity.hom import (
    CorrelationCurve,
    WavepacketModel,
    contaminated_params,
    contamination_probability,
    fit_emission_model,
    gaussian_wavepacket,
    hom_correlations,
    model_emission_profile,
    pair_weights,
    spontaneous_timing,
    visibility,
    weighted_pair_interference,
)

NS = 1e-9


class TestGaussianWavepacket:
    def test_unit_norm(self):
        t = np.linspace(-1500, 1500, 20001) * NS
        for dt, t0 in ((97.4 * NS, 129.5 * NS), (30 * NS, -40 * NS)):
            eps = gaussian_wavepacket(t, dt, t0)
            assert np.trapezoid(eps**2, t) == pytest.approx(1.0, abs=1e-9)

    def test_peak_value(self):
        dt = 50 * NS
        peak = gaussian_wavepacket(50 * NS, dt, 50 * NS)
        assert peak == pytest.approx((2 / (math.pi * dt**2)) ** 0.25)

    def test_one_width_decay(self):
        dt, t0 = 80 * NS, 10 * NS
        ratio = gaussian_wavepacket(t0 + dt, dt, t0) / gaussian_wavepacket(t0, dt, t0)
        assert ratio == pytest.approx(math.exp(-1.0), rel=1e-12)

    def test_nonpositive_width_rejected(self):
        with pytest.raises(ValueError):
            gaussian_wavepacket(0.0, -1e-9, 0.0)


class TestContaminatedParams:
    def test_published_values(self):
        dtp, t0p = contaminated_params(97.4 * NS, 129.5 * NS, 300 * NS, 153.4 * NS)
        assert dtp / NS == pytest.approx(47.6, abs=0.1)
        assert t0p / NS == pytest.approx(226.7, abs=0.1)

    def test_early_decay_limit(self):
        dtp, t0p = contaminated_params(97.4 * NS, 129.5 * NS, 300 * NS, 1e-12)
        assert dtp == pytest.approx(97.4 * NS, rel=1e-3)
        assert t0p == pytest.approx(150 * NS, rel=1e-3)

    def test_out_of_range_rejected(self):
        with pytest.raises(ValueError):
            contaminated_params(97.4 * NS, 129.5 * NS, 300 * NS, 301 * NS)


class TestSpontaneousTiming:
    def test_published_chain(self):
        model = WavepacketModel(97.4 * NS, 129.5 * NS, 47.6 * NS, 226.7 * NS,
                                45.0 * NS, 0.13, 300 * NS)
        t = np.linspace(0, 300 * NS, 1501)
        prof = model_emission_profile(model, t)
        res = spontaneous_timing(300 * NS, (t, prof))
        assert res.t_sp / NS == pytest.approx(153.4, abs=1.0)
        assert res.delta_tau / NS == pytest.approx(45.0, abs=1.0)

    def test_density_matches_cumulative_increment(self):
        # the start-time density integrates to the increment of F^2
        model = WavepacketModel(97.4 * NS, 129.5 * NS, 47.6 * NS, 226.7 * NS,
                                45.0 * NS, 0.13, 300 * NS)
        res = spontaneous_timing(300 * NS, lambda t: 1.0)
        # with flat psi_sq, p_emm ~ 2 F f (L - t); cross-check normalisation
        assert np.trapezoid(res.p_emm, res.t) == pytest.approx(1.0, abs=1e-9)

    def test_symmetric_profile_center_in_upper_half(self):
        # flat remaining-intensity weighting still biases past the pulse middle
        res = spontaneous_timing(300 * NS, lambda t: math.sin(math.pi * t / 300e-9) ** 2)
        assert 150 * NS < res.t_sp < 300 * NS

    def test_degenerate_profile_rejected(self):
        with pytest.raises(ValueError):
            spontaneous_timing(300 * NS, lambda t: 0.0)


class TestContaminationProbability:
    def test_infinite_purcell_limit(self):
        assert contamination_probability((0.5, 0.5), (1e12, 1e12), (0.3, 0.3)) < 1e-11

    def test_symmetric_algebra(self):
        p, fp = 0.21, 0.8
        expected = p / (fp + 1.0)
        assert contamination_probability((0.4, 0.4), (fp, fp), (p, p)) == pytest.approx(expected)

    def test_zero_efficiency_rejected(self):
        with pytest.raises(ValueError):
            contamination_probability((0.0, 0.0), (1.0, 1.0), (0.2, 0.2))


class TestModelEmissionProfile:
    def test_clean_limit(self):
        m = WavepacketModel(97.4 * NS, 129.5 * NS, 47.6 * NS, 226.7 * NS,
                            45.0 * NS, 0.0, 300 * NS)
        t = np.linspace(-200, 600, 1601) * NS
        prof = model_emission_profile(m, t)
        clean = gaussian_wavepacket(t, m.delta_t, m.t0) ** 2
        assert np.abs(prof - clean).max() < 1e-12 * clean.max()

    def test_pure_contaminated_no_jitter(self):
        m = WavepacketModel(97.4 * NS, 129.5 * NS, 47.6 * NS, 226.7 * NS,
                            0.0, 1.0, 300 * NS)
        t = np.linspace(-200, 600, 1601) * NS
        prof = model_emission_profile(m, t)
        cont = gaussian_wavepacket(t, m.delta_t_prime, m.t0_prime) ** 2
        assert np.abs(prof - cont).max() < 1e-12 * cont.max()

    def test_jitter_average_matches_closed_form(self):
        # Gaussian intensity convolved with Gaussian jitter widens the
        # variance from dt'^2/4 to dt'^2/4 + jitter^2/2
        m = WavepacketModel(97.4 * NS, 129.5 * NS, 47.6 * NS, 226.7 * NS,
                            45.0 * NS, 1.0, 300 * NS)
        t = np.linspace(-400, 800, 2401) * NS
        prof = model_emission_profile(m, t)
        sigma_sq = m.delta_t_prime**2 / 4 + m.jitter**2 / 2
        ref = np.exp(-((t - m.t0_prime) ** 2) / (2 * sigma_sq)) / math.sqrt(2 * math.pi * sigma_sq)
        assert np.abs(prof - ref).max() < 1e-6 * ref.max()

    @given(st.floats(0.0, 1.0), st.floats(0.0, 60.0))
    @settings(max_examples=20, deadline=None)
    def test_unit_integral(self, p_cont, jitter_ns):
        m = WavepacketModel(97.4 * NS, 129.5 * NS, 47.6 * NS, 226.7 * NS,
                            jitter_ns * NS, p_cont, 300 * NS)
        t = np.linspace(-900, 1400, 4001) * NS
        assert np.trapezoid(model_emission_profile(m, t), t) == pytest.approx(1.0, abs=1e-6)


class TestFitEmissionModel:
    TRUE = WavepacketModel(97.4 * NS, 129.5 * NS, 47.6 * NS, 226.7 * NS,
                           45.0 * NS, 0.13, 300 * NS)

    def test_noiseless_roundtrip(self):
        t = np.linspace(0, 300 * NS, 301)
        y = model_emission_profile(self.TRUE, t)
        model, resid = fit_emission_model(t, y, 300 * NS, enforce_length_relation=False)
        assert resid < 1e-10 * y.max()
        assert model.delta_t == pytest.approx(self.TRUE.delta_t, rel=1e-5)

    def test_noisy_recovery_within_5_percent(self):
        rng = np.random.default_rng(11)
        t = np.linspace(0, 300 * NS, 301)
        y = model_emission_profile(self.TRUE, t)
        y_noisy = y + 0.01 * y.max() * rng.standard_normal(len(t))
        model, _ = fit_emission_model(t, y_noisy, 300 * NS)
        for attr in ("delta_t", "t0", "delta_t_prime", "t0_prime", "jitter"):
            got = getattr(model, attr)
            ref = getattr(self.TRUE, attr)
            assert got == pytest.approx(ref, rel=0.05), attr

    def test_clean_gaussian_with_fixed_zero_pcont(self):
        t = np.linspace(0, 300 * NS, 301)
        y = gaussian_wavepacket(t, 80 * NS, 140 * NS) ** 2
        model, resid = fit_emission_model(t, y, 300 * NS, P_cont_fixed=0.0)
        assert model.delta_t == pytest.approx(80 * NS, rel=1e-6)
        assert model.t0 == pytest.approx(140 * NS, rel=1e-6)

    def test_too_few_samples_rejected(self):
        t = np.linspace(0, 300 * NS, 10)
        with pytest.raises(ValueError):
            fit_emission_model(t, np.ones(10), 300 * NS)


def quad_correlations(a, b, tau):
    """Brute-force defining integrals for one pair, no jitter or beat."""
    eps_a = lambda t: gaussian_wavepacket(t, a[0], a[1])
    eps_b = lambda t: gaussian_wavepacket(t, b[0], b[1])
    span = 8 * max(a[0], b[0])
    lo = min(a[1], b[1]) - span
    hi = max(a[1], b[1]) + span
    perp = 0.25 * (
        quad(lambda t: eps_a(t) ** 2 * eps_b(t + tau) ** 2, lo, hi, limit=200)[0]
        + quad(lambda t: eps_b(t) ** 2 * eps_a(t + tau) ** 2, lo, hi, limit=200)[0]
    )
    intf = 0.5 * quad(
        lambda t: eps_a(t) * eps_a(t + tau) * eps_b(t) * eps_b(t + tau), lo, hi, limit=200
    )[0]
    return perp, perp - intf


class TestHomCorrelations:
    def test_identical_photons_perfect_bunching(self):
        c = hom_correlations((97.4 * NS, 0.0), (97.4 * NS, 0.0))
        assert np.abs(c.P_para).max() == 0.0

    def test_perp_normalisation(self):
        c = hom_correlations((97.4 * NS, 40 * NS), (55 * NS, -70 * NS))
        assert np.trapezoid(c.P_perp, c.tau) == pytest.approx(0.5, abs=1e-6)

    def test_against_quadrature_oracle(self):
        a = (97.4 * NS, 129.5 * NS)
        b = (47.6 * NS, 226.7 * NS)
        c = hom_correlations(a, b)
        for tau_ns in (-150.0, -40.0, 0.0, 60.0, 180.0):
            k = int(np.argmin(np.abs(c.tau - tau_ns * NS)))
            ref_perp, ref_para = quad_correlations(a, b, c.tau[k])
            assert c.P_perp[k] == pytest.approx(ref_perp, rel=1e-6, abs=1e-3)
            assert c.P_para[k] == pytest.approx(ref_para, rel=1e-6, abs=1e-3)

    def test_bounds_without_beat(self):
        c = hom_correlations((97.4 * NS, 0.0), (50 * NS, 90 * NS), jitter=30 * NS)
        scale = c.P_perp.max()
        assert np.all(c.P_para >= -1e-9 * scale)
        assert np.all(c.P_para <= c.P_perp + 1e-9 * scale)

    def test_symmetry_for_identical_inputs(self):
        c = hom_correlations((80 * NS, 20 * NS), (80 * NS, 20 * NS), jitter=25 * NS)
        scale = c.P_perp.max()
        assert np.abs(c.P_perp - c.P_perp[::-1]).max() < 1e-9 * scale
        assert np.abs(c.P_para - c.P_para[::-1]).max() < 1e-9 * scale

    def test_beat_oscillation(self):
        beat = 2 * math.pi * 15e6
        c = hom_correlations((97.4 * NS, 0.0), (97.4 * NS, 0.0), beat=beat)
        k0 = int(np.argmin(np.abs(c.tau)))
        assert abs(c.P_para[k0]) < 1e-12
        k_half = int(np.argmin(np.abs(c.tau - math.pi / beat)))
        assert c.P_para[k_half] > c.P_perp[k_half]

    def test_distinguishable_limit_equals_intensity_correlation(self):
        # far-separated photons: interference term vanishes, P_para -> P_perp
        c = hom_correlations((40 * NS, 0.0), (40 * NS, 600 * NS))
        k = int(np.argmin(np.abs(c.tau - 600 * NS)))
        assert c.P_para[k] == pytest.approx(c.P_perp[k], rel=1e-6)

    def test_jitter_kills_visibility_monotonically(self):
        vs = []
        for jit_ns in (0.0, 40.0, 90.0, 200.0, 500.0, 900.0):
            c = hom_correlations((60 * NS, 0.0), (60 * NS, 0.0), jitter=jit_ns * NS)
            vs.append(visibility(c))
        assert vs[0] == pytest.approx(1.0, abs=1e-9)
        assert all(vs[i] > vs[i + 1] for i in range(len(vs) - 1))
        # equal-width pair under jitter j has V = 1/sqrt(1 + (j/dt)^2)
        assert vs[-1] == pytest.approx(1 / math.sqrt(1 + (900 / 60) ** 2), rel=1e-3)


class TestWeightedPairInterference:
    MODEL = WavepacketModel(97.4 * NS, 129.5 * NS, 47.6 * NS, 226.7 * NS,
                            45.0 * NS, 0.13, 300 * NS)

    def test_clean_limit_reduces_to_single_pair(self):
        clean = WavepacketModel(97.4 * NS, 129.5 * NS, 47.6 * NS, 226.7 * NS,
                                45.0 * NS, 0.0, 300 * NS)
        mix = weighted_pair_interference(clean)
        single = hom_correlations((clean.delta_t, clean.t0), (clean.delta_t, clean.t0))
        k = int(np.argmin(np.abs(mix.tau)))
        ks = int(np.argmin(np.abs(single.tau)))
        assert mix.P_perp[k] == pytest.approx(single.P_perp[ks], rel=1e-9)
        assert visibility(mix) == pytest.approx(1.0, abs=1e-9)

    def test_weights_must_sum_to_one(self):
        with pytest.raises(ValueError):
            weighted_pair_interference(self.MODEL, weights=(0.5, 0.2, 0.2, 0.2))

    def test_pair_weights_algebra(self):
        w = pair_weights(0.13)
        assert sum(w) == pytest.approx(1.0)
        assert w[0] == pytest.approx(0.87**2)
        assert w[3] == pytest.approx(0.13**2)

    def test_visibility_bounds(self):
        curve = weighted_pair_interference(self.MODEL)
        v = visibility(curve)
        assert 0.0 < v < 1.0

    def test_beat_narrows_central_dip(self):
        no_beat = weighted_pair_interference(self.MODEL)
        beat_model = WavepacketModel(97.4 * NS, 129.5 * NS, 47.6 * NS, 226.7 * NS,
                                     45.0 * NS, 0.13, 300 * NS,
                                     beat_fraction=0.09, beat_freq=2 * math.pi * 15e6)
        with_beat = weighted_pair_interference(beat_model)

        def dip_halfwidth(curve):
            k0 = int(np.argmin(np.abs(curve.tau)))
            for k in range(k0, len(curve.tau)):
                if curve.P_para[k] > 0.5 * curve.P_perp[k]:
                    return curve.tau[k]
            return curve.tau[-1]

        assert dip_halfwidth(with_beat) < dip_halfwidth(no_beat)
        assert visibility(with_beat) < visibility(no_beat)


class TestVisibility:
    def test_perfect_suppression(self):
        tau = np.linspace(-1, 1, 101)
        perp = np.exp(-(tau**2))
        curve = CorrelationCurve(tau=tau, P_perp=perp, P_para=np.zeros_like(perp))
        assert visibility(curve) == 1.0

    def test_no_suppression(self):
        tau = np.linspace(-1, 1, 101)
        perp = np.exp(-(tau**2))
        curve = CorrelationCurve(tau=tau, P_perp=perp, P_para=perp.copy())
        assert visibility(curve) == pytest.approx(0.0, abs=1e-12)

    def test_windowed(self):
        tau = np.linspace(-1, 1, 2001)
        perp = np.ones_like(tau)
        para = np.where(np.abs(tau) < 0.1, 0.0, 1.0)
        curve = CorrelationCurve(tau=tau, P_perp=perp, P_para=para)
        assert visibility(curve, window=0.05) == pytest.approx(1.0, abs=1e-9)
        assert visibility(curve) == pytest.approx(0.1, abs=1e-3)
