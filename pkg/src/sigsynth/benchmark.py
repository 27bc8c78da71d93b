"""Timing helpers behind the ``benchmark`` subcommand and the scaling checks."""

from __future__ import annotations

import time

import numpy as np

from . import _kernels
from .interchange import draw_pairs
from .optim import OptimizerState, adam_step, metric_gradient, range_penalty_grad
from .sigcore import RangePenalty, make_rng
from .spectral import autocorr_fft

__all__ = ["time_gradient_step", "time_swap_proposals", "loglog_slope", "time_to_threshold"]


def _exp_target(m: int, power: float = 0.05, tau: float = 50.0) -> np.ndarray:
    return power * np.exp(-np.arange(m) / tau)


def time_gradient_step(n: int, m: int, repeats: int = 20, seed: int = 0) -> float:
    """Median wall time of one full gradient step at length ``n``.

    A step is what the combined loop does per iteration before its swaps:
    metric gradient, penalty subgradient, Adam update, and the full
    autocorrelation recomputation.
    """
    rng = make_rng(seed)
    x = 0.25 * rng.standard_normal(n)
    a = _exp_target(m)
    w = np.ones(m)
    pen = RangePenalty()
    opt = OptimizerState.fresh(n)
    ax = autocorr_fft(x, m)
    times = []
    for _ in range(repeats + 1):
        t0 = time.perf_counter()
        g = metric_gradient(x, a, ax, w) + range_penalty_grad(x, pen)
        x, opt = adam_step(x, g, opt)
        ax = autocorr_fft(x, m)
        _kernels.weighted_sq_error(a, ax, w)
        times.append(time.perf_counter() - t0)
    return float(np.median(times[1:]))


def time_swap_proposals(n: int, m: int, count: int = 200_000, seed: int = 0) -> float:
    """Mean wall time per swap proposal at length ``n`` and lag window ``m``."""
    rng = make_rng(seed)
    x = rng.uniform(-0.5, 0.5, n)
    a = _exp_target(m)
    w = np.ones(m)
    ax = autocorr_fft(x, m)
    d = _kernels.weighted_sq_error(a, ax, w)
    ii, jj = draw_pairs(rng, n, count)
    rec = np.empty(0)
    # Compile outside the timed region.
    _kernels.interchange_batch(x.copy(), ax.copy(), a, w, ii[:10], jj[:10], d, rec)
    t0 = time.perf_counter()
    _kernels.interchange_batch(x, ax, a, w, ii, jj, d, rec)
    return (time.perf_counter() - t0) / count


def loglog_slope(sizes, times) -> float:
    """Least-squares slope of ``log(times)`` against ``log(sizes)``."""
    slope, _ = np.polyfit(np.log(np.asarray(sizes, float)), np.log(np.asarray(times, float)), 1)
    return float(slope)


def time_to_threshold(trace, threshold: float) -> float:
    """Elapsed seconds of the first trace row with ``metric_d <= threshold`` (NaN if never)."""
    for e in trace:
        if e.metric_d <= threshold:
            return e.elapsed_seconds
    return float("nan")
