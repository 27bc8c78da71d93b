import numpy as np
import pytest

from sigsynth.optim import (
    LossConfig,
    OptimizerState,
    adam_step,
    loss_gradient,
    metric_gradient,
    range_penalty,
    range_penalty_grad,
    total_loss,
)
from sigsynth.sigcore import InvalidArgumentError, RangePenalty, TargetAutocorrelation
from sigsynth.spectral import MetricConfig, autocorr_direct, autocorr_fft

from oracles import finite_diff_loss, off_kinks


def direct_loss(x, a, w, lo, hi, lam):
    n, m = len(x), len(a)
    d = 0.0
    for k in range(m):
        ak = sum(x[t] * x[t + k] for t in range(n - k)) / n
        d += w[k] * (a[k] - ak) ** 2
    pen = sum(max(0.0, lo - v) + max(0.0, v - hi) for v in x)
    return d + lam * pen


def direct_metric_grad(x, a, w):
    # Double sum over lags and both neighbours, straight from the definition.
    n, m = len(x), len(a)
    ax = autocorr_direct(x, m)
    g = np.zeros(n)
    for t in range(n):
        for k in range(m):
            nb = 0.0
            if t - k >= 0:
                nb += x[t - k]
            if t + k < n:
                nb += x[t + k]
            g[t] += 2.0 / n * w[k] * (ax[k] - a[k]) * nb
    return g


class TestPenalty:
    def test_inside_is_zero(self):
        x = np.linspace(-0.5, 0.5, 11)
        assert range_penalty(x, RangePenalty()) == 0.0
        assert np.all(range_penalty_grad(x, RangePenalty()) == 0.0)

    def test_linear(self):
        x = np.array([0.0, 0.6, 0.2])
        assert range_penalty(x, RangePenalty(-0.5, 0.5, 1.0)) == pytest.approx(0.1, rel=1e-14)

    def test_subgradient_sign_rule(self):
        g = range_penalty_grad(np.array([0.6, 0.0, -0.7, 0.5]), RangePenalty(-0.5, 0.5, 2.0))
        assert g.tolist() == [2.0, 0.0, -2.0, 0.0]


class TestLoss:
    def test_matches_direct_summation(self):
        rng = np.random.default_rng(4)
        n, m = 512, 64
        x = rng.uniform(-0.7, 0.7, n)
        a = 0.1 * np.exp(-np.arange(m) / 10)
        w = rng.uniform(0.5, 1.5, m)
        cfg = LossConfig(MetricConfig(w), RangePenalty(-0.5, 0.5, 1.3))
        ref = direct_loss(x.tolist(), a, w, -0.5, 0.5, 1.3)
        assert total_loss(x, TargetAutocorrelation(a), cfg) == pytest.approx(ref, rel=1e-13)

    def test_zero_gradient_at_exact_fit(self):
        x = np.random.default_rng(1).uniform(-0.4, 0.4, 100)
        target = TargetAutocorrelation(autocorr_fft(x, 20))
        g = loss_gradient(x, target, LossConfig())
        assert np.all(g == 0.0)

    @pytest.mark.parametrize("n,m", [(32, 8), (64, 16), (256, 64)])
    def test_gradient_vs_finite_differences(self, n, m):
        rng = np.random.default_rng(n + m)
        cfg = LossConfig(MetricConfig(rng.uniform(0.5, 1.5, m)), RangePenalty(-0.5, 0.5, 1.0))
        x = off_kinks(rng.uniform(-0.6, 0.6, n), -0.5, 0.5)
        target = TargetAutocorrelation(0.2 * np.exp(-np.arange(m) / 5.0))
        g = loss_gradient(x, target, cfg)
        fd = finite_diff_loss(x, target, cfg)
        big = np.abs(g) > 1e-8
        assert big.any()
        assert np.max(np.abs(g[big] - fd[big]) / np.abs(g[big])) <= 1e-5

    @pytest.mark.parametrize("n,m", [(50, 1), (50, 50), (300, 40)])
    def test_transform_gradient_matches_double_sum(self, n, m):
        rng = np.random.default_rng(m)
        x = rng.normal(size=n)
        a = rng.normal(size=m)
        w = rng.uniform(0, 2, m)
        got = metric_gradient(x, a, autocorr_fft(x, m), w)
        ref = direct_metric_grad(x, a, w)
        assert np.max(np.abs(got - ref)) <= 1e-10 * np.max(np.abs(ref))


class TestAdam:
    def test_zero_gradient(self):
        s = OptimizerState.fresh(5)
        x = np.arange(5.0)
        x1, s1 = adam_step(x, np.zeros(5), s)
        assert np.array_equal(x1, x)
        assert np.all(s1.first_moment == 0) and np.all(s1.second_moment == 0)
        assert s1.step_count == 1

    def test_first_step_on_quadratic(self):
        s = OptimizerState.fresh(1, lr=0.1)
        x = np.array([1.0])
        x1, _ = adam_step(x, 2 * x, s)
        # m_hat = 2, v_hat = 4 after bias correction
        assert x1[0] == pytest.approx(1 - 0.1 * 2 / (2 + 1e-8), rel=1e-15)
        assert x1[0] == pytest.approx(0.9, abs=1e-8)

    def test_converges_on_quadratic(self):
        s = OptimizerState.fresh(1, lr=0.05)
        x = np.array([1.0])
        for _ in range(500):
            x, s = adam_step(x, 2 * x, s)
        assert abs(x[0]) < 0.05

    def test_deterministic_and_pure(self):
        rng = np.random.default_rng(0)
        x, g = rng.normal(size=10), rng.normal(size=10)
        s = OptimizerState.fresh(10)
        a = adam_step(x, g, s)
        b = adam_step(x, g, s)
        assert np.array_equal(a[0], b[0])
        assert np.array_equal(a[1].second_moment, b[1].second_moment)
        assert s.step_count == 0 and np.all(s.first_moment == 0)

    def test_length_mismatch(self):
        with pytest.raises(InvalidArgumentError):
            adam_step(np.zeros(3), np.zeros(4), OptimizerState.fresh(3))


def test_loss_decreases_under_default_lr():
    rng = np.random.default_rng(12)
    n, m = 256, 32
    target = TargetAutocorrelation(0.05 * np.exp(-np.arange(m) / 8))
    cfg = LossConfig()
    x = 0.1 * rng.standard_normal(n)
    s = OptimizerState.fresh(n)
    start = total_loss(x, target, cfg)
    for _ in range(200):
        x, s = adam_step(x, loss_gradient(x, target, cfg), s)
    assert total_loss(x, target, cfg) < 0.5 * start
