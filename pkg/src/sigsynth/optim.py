"""Composite loss, its analytic gradient, and the Adam update."""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np
from scipy import fft as sfft

from .sigcore import InvalidArgumentError, RangePenalty, TargetAutocorrelation
from .spectral import MetricConfig, autocorr_fft, fft_length, metric_d

__all__ = [
    "LossConfig",
    "OptimizerState",
    "range_penalty",
    "range_penalty_grad",
    "metric_gradient",
    "total_loss",
    "loss_gradient",
    "adam_step",
]


@dataclass(frozen=True)
class LossConfig:
    metric: MetricConfig = field(default_factory=MetricConfig)
    penalty: RangePenalty = field(default_factory=RangePenalty)


@dataclass(frozen=True)
class OptimizerState:
    """Adam moment accumulators for an ``n``-sample signal."""

    first_moment: np.ndarray
    second_moment: np.ndarray
    step_count: int = 0
    lr: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8

    @classmethod
    def fresh(cls, n: int, lr: float = 1e-3, beta1: float = 0.9, beta2: float = 0.999,
              eps: float = 1e-8) -> "OptimizerState":
        return cls(np.zeros(n), np.zeros(n), 0, lr, beta1, beta2, eps)


def range_penalty(x, penalty: RangePenalty) -> float:
    x = np.asarray(x)
    below = np.maximum(penalty.lower - x, 0.0)
    above = np.maximum(x - penalty.upper, 0.0)
    return float(penalty.weight * (np.sum(below) + np.sum(above)))


def range_penalty_grad(x, penalty: RangePenalty) -> np.ndarray:
    """Subgradient of the range penalty; 0 on the bounds themselves."""
    x = np.asarray(x)
    g = np.zeros_like(x)
    g[x < penalty.lower] = -penalty.weight
    g[x > penalty.upper] = penalty.weight
    return g


def metric_gradient(x, target, ax, weights) -> np.ndarray:
    """Gradient of ``sum_k w_k (A(k) - A_x(k))**2`` with respect to ``x``.

    ``dA_x(k)/dx_t = (x[t-k] + x[t+k]) / n`` with out-of-range neighbours
    dropped, so the gradient is ``(2/n) * sum_k c_k (x[t-k] + x[t+k])`` with
    ``c_k = w_k (A_x(k) - A(k))``. The convolution and the correlation with
    ``c`` share one spectrum: together they multiply by ``2 Re(C)``.
    """
    x = np.asarray(x, dtype=np.float64)
    n = x.size
    m = ax.size
    c = weights * (ax - target)
    size = fft_length(n, m)
    spec_x = sfft.rfft(x, size)
    spec_c = sfft.rfft(c, size)
    # Lag 0 appears once in the sum but contributes 2*x_t, which the
    # symmetric kernel below already produces.
    h = sfft.irfft(spec_x * (2.0 * spec_c.real), size)[:n]
    return (2.0 / n) * h


def _target_values(target) -> np.ndarray:
    if isinstance(target, TargetAutocorrelation):
        return target.values
    return np.asarray(target, dtype=np.float64)


def total_loss(x, target, cfg: LossConfig) -> float:
    """``D(A, A_x) + L(x)``."""
    a = _target_values(target)
    ax = autocorr_fft(x, a.size)
    return metric_d(a, ax, cfg.metric) + range_penalty(x, cfg.penalty)


def loss_gradient(x, target, cfg: LossConfig, ax: np.ndarray | None = None) -> np.ndarray:
    """Gradient of :func:`total_loss`; pass ``ax`` to reuse a cached autocorrelation."""
    a = _target_values(target)
    if ax is None:
        ax = autocorr_fft(x, a.size)
    w = cfg.metric.resolve(a.size)
    return metric_gradient(x, a, ax, w) + range_penalty_grad(x, cfg.penalty)


def adam_step(x, grad, state: OptimizerState) -> tuple[np.ndarray, OptimizerState]:
    """One bias-corrected Adam update; inputs are left untouched."""
    x = np.asarray(x, dtype=np.float64)
    grad = np.asarray(grad, dtype=np.float64)
    if not x.shape == grad.shape == state.first_moment.shape:
        raise InvalidArgumentError("signal, gradient and optimizer state lengths differ")
    t = state.step_count + 1
    b1, b2 = state.beta1, state.beta2
    m = b1 * state.first_moment + (1.0 - b1) * grad
    v = b2 * state.second_moment + (1.0 - b2) * (grad * grad)
    m_hat = m / (1.0 - b1**t)
    v_hat = v / (1.0 - b2**t)
    x_new = x - state.lr * m_hat / (np.sqrt(v_hat) + state.eps)
    return x_new, replace(state, first_moment=m, second_moment=v, step_count=t)
