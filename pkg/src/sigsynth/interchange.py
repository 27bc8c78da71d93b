"""Greedy stochastic interchange of samples with incremental autocorrelation upkeep."""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .sigcore import (
    ExactPdf,
    InvalidArgumentError,
    Mode,
    RunConfig,
    RunReport,
    TargetAutocorrelation,
    TraceEntry,
    as_signal,
    make_rng,
)
from .spectral import MetricConfig, autocorr_fft, metric_d

__all__ = [
    "InterchangeState",
    "draw_pairs",
    "propose_and_maybe_swap",
    "run_batch",
    "run_interchange",
]

# Upper bound on proposals between wall-clock checks in budgeted runs.
_MAX_BATCH = 1 << 16

_EMPTY = np.empty(0)


@dataclass
class InterchangeState:
    """Signal, its autocorrelation over the target window, and the current metric.

    ``run_batch`` and ``propose_and_maybe_swap`` mutate ``x`` and ``ax`` in
    place.
    """

    x: np.ndarray
    ax: np.ndarray
    current_d: float
    accepted: int = 0
    proposed: int = 0
    since_resync: int = 0

    @classmethod
    def start(cls, x, target: TargetAutocorrelation, cfg: MetricConfig | None = None):
        x = as_signal(x)
        if target.m > x.size:
            raise InvalidArgumentError(f"lag count m={target.m} exceeds signal length n={x.size}")
        ax = autocorr_fft(x, target.m)
        return cls(x, ax, metric_d(target, ax, cfg))

    def resync(self, target: TargetAutocorrelation, weights: np.ndarray) -> None:
        """Replace the incrementally maintained estimate by a full recomputation."""
        self.ax = autocorr_fft(self.x, target.m)
        self.current_d = float(_kernels.weighted_sq_error(target.values, self.ax, weights))
        self.since_resync = 0


def draw_pairs(rng: np.random.Generator, n: int, size: int) -> tuple[np.ndarray, np.ndarray]:
    """``size`` uniformly distributed ordered pairs of distinct indices in ``0..n-1``.

    The second index is drawn from the ``n-1`` positions other than the
    first, which has the same distribution as redrawing until distinct.
    """
    if n < 2:
        raise InvalidArgumentError("need n >= 2 to draw distinct pairs")
    ii = rng.integers(0, n, size=size, dtype=np.int64)
    jj = rng.integers(0, n - 1, size=size, dtype=np.int64)
    jj += jj >= ii
    return ii, jj


def run_batch(state: InterchangeState, target: TargetAutocorrelation, weights: np.ndarray,
              ii: np.ndarray, jj: np.ndarray, trace_d: np.ndarray | None = None,
              resync_interval: int = 10**6) -> int:
    """Apply the proposals ``zip(ii, jj)`` to ``state``; returns the number accepted.

    With ``trace_d`` given, the metric after each proposal is written into it.
    """
    rec = _EMPTY if trace_d is None else trace_d
    d, acc = _kernels.interchange_batch(state.x, state.ax, target.values, weights,
                                        ii, jj, state.current_d, rec)
    state.current_d = d
    state.accepted += acc
    state.proposed += ii.size
    state.since_resync += acc
    if state.since_resync >= resync_interval:
        state.resync(target, weights)
    return acc


def propose_and_maybe_swap(state: InterchangeState, target: TargetAutocorrelation,
                           cfg: MetricConfig | None, rng: np.random.Generator) -> bool:
    """Draw one swap and keep it iff it strictly lowers the metric."""
    w = (cfg or MetricConfig()).resolve(target.m)
    ii, jj = draw_pairs(rng, state.x.size, 1)
    return run_batch(state, target, w, ii, jj) == 1


def run_interchange(target: TargetAutocorrelation, pdf: ExactPdf, n: int, cfg: RunConfig,
                    metric: MetricConfig | None = None, rng: np.random.Generator | None = None,
                    grid_size: int | None = None) -> RunReport:
    """Sample an initial signal from ``pdf``, then run ``cfg.steps`` greedy swap proposals."""
    from .pipeline import finish_report
    from .sampling import integrate_pdf, inverse_transform_sample

    t0 = time.perf_counter()
    if rng is None:
        rng = make_rng(cfg.rng_seed)
    metric = metric or MetricConfig()
    w = metric.resolve(target.m)
    cdf = integrate_pdf(pdf, grid_size)
    x0 = inverse_transform_sample(cdf, n, rng)
    state = InterchangeState.start(x0, target, metric)

    trace = [TraceEntry(time.perf_counter() - t0, 0, state.current_d, state.current_d)]
    step = 0
    limit = cfg.steps
    deadline = None if cfg.time_budget is None else t0 + cfg.time_budget
    batch = min(cfg.trace_interval, _MAX_BATCH)
    next_trace = cfg.trace_interval
    while limit is None or step < limit:
        if deadline is not None and time.perf_counter() >= deadline:
            break
        size = min(batch, next_trace - step)
        if limit is not None:
            size = min(size, limit - step)
        ii, jj = draw_pairs(rng, n, size)
        run_batch(state, target, w, ii, jj, resync_interval=cfg.resync_interval)
        step += size
        if step == next_trace:
            trace.append(TraceEntry(time.perf_counter() - t0, step, state.current_d,
                                    state.current_d))
            next_trace += cfg.trace_interval
    if trace[-1].step != step:
        trace.append(TraceEntry(time.perf_counter() - t0, step, state.current_d, state.current_d))

    return finish_report(
        target, state.x, trace, t0, cfg, Mode.INTERCHANGE, step,
        accepted=state.accepted, proposed=state.proposed, initial=x0, metric=metric,
    )
