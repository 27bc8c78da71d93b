import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sigsynth.sigcore import InconsistentSpectrumError, InvalidArgumentError, TargetAutocorrelation
from sigsynth.spectral import (
    MetricConfig,
    SwapProposal,
    autocorr_direct,
    autocorr_fft,
    metric_d,
    psd_to_autocorr,
    swap_delta,
    vaf,
)


def brute_autocorr(x, m):
    # Pure-Python double loop; independent of both library paths.
    n = len(x)
    return np.array([sum(x[t] * x[t + k] for t in range(n - k)) / n for k in range(m)])


def swapped(x, i, j):
    y = np.array(x, dtype=float)
    y[i], y[j] = y[j], y[i]
    return y


class TestAutocorr:
    def test_unit_signal(self):
        np.testing.assert_allclose(autocorr_fft(np.ones(4), 3), [1.0, 0.75, 0.5], atol=1e-15)
        np.testing.assert_allclose(autocorr_direct(np.ones(4), 3), [1.0, 0.75, 0.5])

    def test_alternating(self):
        x = [1.0, -1.0, 1.0, -1.0]
        np.testing.assert_allclose(autocorr_fft(x, 2), [1.0, -0.75], atol=1e-15)

    def test_direct_small_cases(self):
        assert autocorr_direct([1.0, 0.0], 1).tolist() == [0.5]
        assert np.all(autocorr_direct(np.zeros(10), 7) == 0)

    def test_last_lag_single_term(self):
        rng = np.random.default_rng(3)
        x = rng.normal(size=17)
        assert autocorr_direct(x, 17)[-1] == pytest.approx(x[0] * x[-1] / 17, rel=1e-15)
        assert autocorr_fft(x, 17)[-1] == pytest.approx(x[0] * x[-1] / 17, abs=1e-15)

    def test_direct_matches_brute_force(self):
        rng = np.random.default_rng(11)
        x = rng.normal(size=40)
        np.testing.assert_allclose(autocorr_direct(x, 40), brute_autocorr(x.tolist(), 40),
                                   rtol=1e-12, atol=1e-14)

    def test_fft_matches_direct_large(self):
        rng = np.random.default_rng(5)
        x = rng.normal(size=4096)
        ref = autocorr_direct(x, 512)
        got = autocorr_fft(x, 512)
        assert np.max(np.abs(got - ref)) <= 1e-10 * ref[0]

    @pytest.mark.parametrize("m", [0, 5])
    def test_m_out_of_range(self, m):
        with pytest.raises(InvalidArgumentError):
            autocorr_fft(np.ones(4), m)
        with pytest.raises(InvalidArgumentError):
            autocorr_direct(np.ones(4), m)

    @settings(max_examples=60, deadline=None)
    @given(st.integers(2, 300), st.data())
    def test_fft_equals_direct_property(self, n, data):
        m = data.draw(st.integers(1, n))
        seed = data.draw(st.integers(0, 2**32 - 1))
        x = np.random.default_rng(seed).uniform(-1, 1, n)
        ref = autocorr_direct(x, m)
        assert np.max(np.abs(autocorr_fft(x, m) - ref)) <= 1e-10 * ref[0]


class TestSwapDelta:
    def test_equal_values_identity(self):
        x = np.array([0.3, 1.0, 0.3, -2.0])
        ax = autocorr_fft(x, 3)
        assert np.array_equal(swap_delta(x, ax, (0, 2)), ax)

    def test_small_example(self):
        x = np.arange(1.0, 7.0)
        # positions 2 and 5 (1-based) are 0-based 1 and 4
        got = swap_delta(x, autocorr_direct(x, 4), SwapProposal(1, 4))
        np.testing.assert_allclose(got, brute_autocorr(swapped(x, 1, 4).tolist(), 4),
                                   atol=1e-12)

    def test_inputs_untouched(self):
        x = np.arange(8.0)
        ax = autocorr_fft(x, 5)
        x0, ax0 = x.copy(), ax.copy()
        swap_delta(x, ax, (2, 6))
        assert np.array_equal(x, x0) and np.array_equal(ax, ax0)

    @pytest.mark.parametrize("p", [(0, 0), (-1, 2), (1, 8)])
    def test_bad_indices(self, p):
        with pytest.raises(InvalidArgumentError):
            swap_delta(np.arange(8.0), np.zeros(3), p)

    def test_random_overlap_cases(self):
        rng = np.random.default_rng(2024)
        worst = 0.0
        for _ in range(2000):
            n = int(rng.integers(2, 40))
            m = int(rng.integers(1, n + 1))
            x = rng.normal(size=n)
            i = int(rng.integers(n))
            # bias towards close pairs so |i-j| <= 2(m-1) is common
            j = int(np.clip(i + rng.integers(-2 * m, 2 * m + 1), 0, n - 1))
            if i == j:
                j = (i + 1) % n
            got = swap_delta(x, autocorr_fft(x, m), (i, j))
            worst = max(worst, np.max(np.abs(got - autocorr_direct(swapped(x, i, j), m))))
        assert worst <= 1e-10

    @settings(max_examples=100, deadline=None)
    @given(st.integers(2, 60), st.data())
    def test_involution(self, n, data):
        m = data.draw(st.integers(1, n))
        i = data.draw(st.integers(0, n - 1))
        j = data.draw(st.integers(0, n - 1).filter(lambda v: v != i))
        x = np.random.default_rng(data.draw(st.integers(0, 2**31))).normal(size=n)
        ax = autocorr_fft(x, m)
        once = swap_delta(x, ax, (i, j))
        twice = swap_delta(swapped(x, i, j), once, (i, j))
        assert np.max(np.abs(twice - ax)) <= 1e-9


class TestMetric:
    def test_identity_and_single_term(self):
        a = np.array([1.0, 0.5, 0.25])
        assert metric_d(a, a) == 0.0
        assert metric_d([1.0, 0.0], [1.0, 0.1]) == pytest.approx(0.01, rel=1e-14)

    def test_accepts_target_type(self):
        t = TargetAutocorrelation([1.0, 0.5])
        assert metric_d(t, [1.0, 0.4]) == pytest.approx(0.01)

    def test_weighted_matches_summation(self):
        rng = np.random.default_rng(9)
        a, b, w = rng.normal(size=64), rng.normal(size=64), rng.uniform(0, 2, 64)
        ref = 0.0
        for k in range(64):
            ref += w[k] * (a[k] - b[k]) ** 2
        assert metric_d(a, b, MetricConfig(w)) == pytest.approx(ref, rel=1e-14)

    def test_zero_weight_lags_ignored(self):
        w = np.array([1.0, 0.0, 1.0])
        assert metric_d([1.0, 2.0, 3.0], [1.0, -5.0, 3.0], MetricConfig(w)) == 0.0

    def test_errors(self):
        with pytest.raises(InvalidArgumentError):
            metric_d([1.0, 2.0], [1.0])
        with pytest.raises(InvalidArgumentError):
            MetricConfig(np.zeros(3))
        with pytest.raises(InvalidArgumentError):
            MetricConfig([1.0, -1.0])
        with pytest.raises(InvalidArgumentError):
            metric_d([1.0, 2.0], [1.0, 2.0], MetricConfig([1.0, 1.0, 1.0]))


class TestPsd:
    def test_flat_spectrum_is_white(self):
        t = psd_to_autocorr(np.full(256, 0.3), 32)
        assert t.values[0] == pytest.approx(0.3, rel=1e-12)
        assert np.max(np.abs(t.values[1:])) <= 1e-12

    def test_flat_onesided(self):
        t = psd_to_autocorr(np.full(129, 0.3), 32, onesided=True)
        assert t.values[0] == pytest.approx(0.3, rel=1e-12)
        assert np.max(np.abs(t.values[1:])) <= 1e-12

    def test_single_frequency_cosine(self):
        nb, f, c = 512, 7, 2.5
        psd = np.zeros(nb)
        psd[f] = psd[nb - f] = c
        t = psd_to_autocorr(psd, 100)
        k = np.arange(100)
        np.testing.assert_allclose(t.values, 2 * c / nb * np.cos(2 * np.pi * f * k / nb),
                                   atol=1e-14)

    def test_lorentzian_pair(self):
        # Discrete-time Fourier pair of a^|k|: (1 - a^2) / (1 - 2 a cos w + a^2).
        nb, tau = 4096, 20.0
        a = np.exp(-1 / tau)
        w = 2 * np.pi * np.arange(nb) / nb
        psd = (1 - a * a) / (1 - 2 * a * np.cos(w) + a * a)
        t = psd_to_autocorr(psd, 256)
        k = np.arange(65)
        rel = np.abs(t.values[:65] - a**k) / a**k
        assert np.max(rel) <= 0.01

    def test_negative_entry(self):
        with pytest.raises(InvalidArgumentError):
            psd_to_autocorr([1.0, -0.1, 1.0], 2)

    def test_asymmetric_spectrum(self):
        psd = np.zeros(64)
        psd[0] = 1.0
        psd[3] = 1.0
        with pytest.raises(InconsistentSpectrumError):
            psd_to_autocorr(psd, 8)

    def test_too_many_lags(self):
        with pytest.raises(InvalidArgumentError):
            psd_to_autocorr(np.ones(8), 9)


class TestVaf:
    a = np.array([1.0, 0.5, 0.25, 0.125])

    def test_perfect(self):
        assert vaf(self.a, self.a) == 100.0

    def test_offset_carries_no_variance(self):
        assert vaf(self.a, self.a + 0.37) == pytest.approx(100.0, abs=1e-12)

    def test_single_lag_perturbation(self):
        b = self.a.copy()
        b[1] += 0.01
        r = self.a - b
        r_mean = sum(r) / 4
        var_r = sum((v - r_mean) ** 2 for v in r) / 4
        a_mean = sum(self.a) / 4
        var_a = sum((v - a_mean) ** 2 for v in self.a) / 4
        assert vaf(self.a, b) == pytest.approx(100 * (1 - var_r / var_a), rel=1e-13)

    def test_poor_fit_negative(self):
        assert vaf(self.a, -3 * self.a) < 0

    def test_zero_variance_target(self):
        with pytest.raises(InvalidArgumentError):
            vaf([1.0, 1.0], [1.0, 0.0])
