"""Stationarity score, empirical quantiles and trace/quantile CSV export.

The stationarity score is a windowed proxy, not a hypothesis test. It is
only ever reported; pass/fail thresholds belong to callers.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .sigcore import InvalidArgumentError, TraceEntry

__all__ = [
    "StationarityScore",
    "stationarity",
    "empirical_quantiles",
    "export_trace",
    "read_trace",
    "export_quantiles",
    "TRACE_COLUMNS",
]

TRACE_COLUMNS = ("elapsed_seconds", "step", "metric_d", "total_loss")


@dataclass(frozen=True)
class StationarityScore:
    window_count: int
    window_means: np.ndarray
    window_rms: np.ndarray
    mean_deviation: float
    power_ratio_deviation: float


def stationarity(x, windows: int = 16) -> StationarityScore:
    """Split ``x`` into ``windows`` equal blocks and compare block statistics.

    ``mean_deviation`` is the largest ``|block mean - global mean|`` in units
    of the global standard deviation; ``power_ratio_deviation`` is the
    largest ``|block mean square / global mean square - 1|``. Trailing
    samples that do not fill a block are dropped before either global
    statistic is taken.
    """
    x = np.asarray(x, dtype=np.float64)
    b = int(windows)
    if b < 2 or x.size < 2 * b:
        raise InvalidArgumentError(f"need windows >= 2 and n >= 2*windows, got B={b}, n={x.size}")
    width = x.size // b
    blocks = x[: b * width].reshape(b, width)
    used = blocks.ravel()
    g_mean = used.mean()
    g_std = used.std()
    g_power = np.mean(used * used)
    if not g_std > 0:
        raise InvalidArgumentError("signal has zero variance; mean deviation is undefined")
    means = blocks.mean(axis=1)
    powers = np.mean(blocks * blocks, axis=1)
    return StationarityScore(
        window_count=b,
        window_means=means,
        window_rms=np.sqrt(powers),
        mean_deviation=float(np.max(np.abs(means - g_mean)) / g_std),
        power_ratio_deviation=float(np.max(np.abs(powers / g_power - 1.0))),
    )


def empirical_quantiles(x) -> np.ndarray:
    """Sorted copy of ``x``; entry ``k`` estimates the ``k/n`` quantile."""
    return np.sort(np.asarray(x, dtype=np.float64), kind="stable")


def _fmt(v: float) -> str:
    return repr(float(v))


def export_trace(trace, path) -> Path:
    """Write a trace (list of :class:`TraceEntry` or a report) to CSV."""
    entries = getattr(trace, "trace", trace)
    path = Path(path)
    try:
        with path.open("w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(TRACE_COLUMNS)
            for e in entries:
                w.writerow([_fmt(e.elapsed_seconds), str(int(e.step)), _fmt(e.metric_d),
                            _fmt(e.total_loss)])
    except OSError as exc:
        raise OSError(f"cannot write trace to {path}: {exc}") from exc
    return path


def read_trace(path) -> list[TraceEntry]:
    path = Path(path)
    with path.open(newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or tuple(rows[0]) != TRACE_COLUMNS:
        raise InvalidArgumentError(f"{path}: not a trace file (bad header)")
    return [TraceEntry(float(r[0]), int(r[1]), float(r[2]), float(r[3])) for r in rows[1:]]


def export_quantiles(x, path) -> Path:
    path = Path(path)
    q = empirical_quantiles(x)
    try:
        with path.open("w") as fh:
            fh.write("value\n")
            fh.writelines(f"{v!r}\n" for v in q.tolist())
    except OSError as exc:
        raise OSError(f"cannot write quantiles to {path}: {exc}") from exc
    return path
