"""Interleaved gradient steps and swap proposals, plus the optimization-only baseline."""

from __future__ import annotations

import time
from dataclasses import replace

import numpy as np

from . import _kernels
from .diagnostics import stationarity
from .interchange import InterchangeState, draw_pairs, run_batch, run_interchange
from .optim import LossConfig, OptimizerState, adam_step, metric_gradient, range_penalty, \
    range_penalty_grad
from .sampling import default_init_sigma, gaussian_init, integrate_pdf, inverse_transform_sample
from .sigcore import (
    ExactPdf,
    InvalidArgumentError,
    Mode,
    NumericalFailure,
    RunConfig,
    RunReport,
    TargetAutocorrelation,
    TraceEntry,
    make_rng,
)
from .spectral import MetricConfig, autocorr_fft, metric_d, vaf

__all__ = ["run_combined", "run_optimization_only", "run", "finish_report"]

# Outer steps whose swap pairs are drawn from the stream in one call. Fixed,
# so the consumption order does not depend on budgets or trace settings.
_PAIR_BLOCK = 1024


def finish_report(target, x, trace, t0, cfg: RunConfig, mode: Mode, steps_run: int, *,
                  accepted=0, proposed=0, initial=None, metric=None) -> RunReport:
    ax = autocorr_fft(x, target.m)
    final_d = metric_d(target, ax, metric)
    try:
        v = vaf(target, ax)
    except InvalidArgumentError:
        v = float("nan")
    try:
        score = stationarity(x, cfg.stationarity_windows)
    except InvalidArgumentError:
        score = None
    return RunReport(
        final_signal=x,
        trace=trace,
        final_metric=final_d,
        vaf_percent=v,
        stationarity=score,
        total_seconds=time.perf_counter() - t0,
        mode=mode,
        steps_run=steps_run,
        accepted_swaps=accepted,
        proposed_swaps=proposed,
        initial_signal=initial,
    )


def _initial_signal(n: int, cfg: RunConfig, loss: LossConfig, rng, pdf: ExactPdf | None):
    if cfg.init_from_pdf:
        if pdf is None:
            raise InvalidArgumentError("init_from_pdf needs an exact PDF")
        return inverse_transform_sample(integrate_pdf(pdf), n, rng)
    sigma = cfg.init_sigma if cfg.init_sigma is not None else default_init_sigma(loss.penalty)
    return gaussian_init(n, sigma, rng)


def run_combined(target: TargetAutocorrelation, n: int, cfg: RunConfig,
                 loss: LossConfig | None = None, rng: np.random.Generator | None = None,
                 pdf: ExactPdf | None = None) -> RunReport:
    """Alternate one Adam step on ``D + L`` with ``cfg.swaps_per_gradient_step`` swap proposals.

    The autocorrelation is recomputed in full after every gradient step and
    updated incrementally across the swaps that follow; the next gradient
    step reuses it. Trace rows record the metric ``D`` alone, with ``D + L``
    in the ``total_loss`` column.
    """
    t0 = time.perf_counter()
    loss = loss or LossConfig()
    if rng is None:
        rng = make_rng(cfg.rng_seed)
    if target.m > n:
        raise InvalidArgumentError(f"lag count m={target.m} exceeds signal length n={n}")
    a = target.values
    w = loss.metric.resolve(target.m)
    penalty = loss.penalty
    swaps = cfg.swaps_per_gradient_step

    x0 = _initial_signal(n, cfg, loss, rng, pdf)
    state = InterchangeState.start(x0, target, loss.metric)
    opt = OptimizerState.fresh(n, cfg.learning_rate, cfg.beta1, cfg.beta2, cfg.eps)

    def row(step):
        d = state.current_d
        return TraceEntry(time.perf_counter() - t0, step, d, d + range_penalty(state.x, penalty))

    trace = [row(0)]
    limit = cfg.steps
    deadline = None if cfg.time_budget is None else t0 + cfg.time_budget
    ii = jj = None
    step = 0
    while limit is None or step < limit:
        if deadline is not None and time.perf_counter() >= deadline:
            break
        grad = metric_gradient(state.x, a, state.ax, w) + range_penalty_grad(state.x, penalty)
        x_new, opt = adam_step(state.x, grad, opt)
        state.x = x_new
        state.ax = autocorr_fft(x_new, target.m)
        state.current_d = float(_kernels.weighted_sq_error(a, state.ax, w))
        if swaps:
            slot = step % _PAIR_BLOCK
            if slot == 0:
                ii, jj = draw_pairs(rng, n, _PAIR_BLOCK * swaps)
            lo = slot * swaps
            run_batch(state, target, w, ii[lo:lo + swaps], jj[lo:lo + swaps],
                      resync_interval=cfg.resync_interval)
        step += 1
        if not np.isfinite(state.current_d):
            raise NumericalFailure(f"metric became non-finite at step {step}")
        if step % cfg.trace_interval == 0:
            trace.append(row(step))
    if trace[-1].step != step:
        trace.append(row(step))

    mode = Mode.COMBINED if swaps else Mode.OPTIMIZATION_ONLY
    return finish_report(target, state.x, trace, t0, cfg, mode, step,
                         accepted=state.accepted, proposed=state.proposed, initial=x0,
                         metric=loss.metric)


def run_optimization_only(target: TargetAutocorrelation, n: int, cfg: RunConfig,
                          loss: LossConfig | None = None,
                          rng: np.random.Generator | None = None,
                          pdf: ExactPdf | None = None) -> RunReport:
    """:func:`run_combined` with no swap proposals."""
    return run_combined(target, n, replace(cfg, swaps_per_gradient_step=0), loss, rng, pdf)


def run(target: TargetAutocorrelation, n: int, cfg: RunConfig, *, loss: LossConfig | None = None,
        pdf: ExactPdf | None = None, rng: np.random.Generator | None = None) -> RunReport:
    """Dispatch on ``cfg.mode``."""
    if cfg.mode is Mode.INTERCHANGE:
        if pdf is None:
            raise InvalidArgumentError("interchange mode needs an exact PDF")
        metric = loss.metric if loss is not None else None
        return run_interchange(target, pdf, n, cfg, metric, rng)
    if cfg.mode is Mode.OPTIMIZATION_ONLY:
        return run_optimization_only(target, n, cfg, loss, rng, pdf)
    return run_combined(target, n, cfg, loss, rng, pdf)
