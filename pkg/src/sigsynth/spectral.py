"""Autocorrelation estimates, the swap update, the mismatch metric and VAF.

One normalization is used everywhere: the biased, non-mean-subtracted,
linear (zero padded, non-circular) sample autocorrelation

    A_x(k) = (1/n) * sum_{t=0}^{n-1-k} x[t] * x[t+k],   k = 0..m-1

so that ``A_x(0)`` is the mean signal power.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import fft as sfft

from . import _kernels
from .sigcore import InconsistentSpectrumError, InvalidArgumentError, TargetAutocorrelation

__all__ = [
    "MetricConfig",
    "SwapProposal",
    "fft_length",
    "autocorr_fft",
    "autocorr_direct",
    "swap_delta",
    "metric_d",
    "psd_to_autocorr",
    "vaf",
]


@dataclass(frozen=True)
class MetricConfig:
    """Per-lag weights for the squared-error metric; ``None`` means all ones."""

    weights: np.ndarray | None = None

    def __post_init__(self):
        if self.weights is not None:
            w = np.array(self.weights, dtype=np.float64)
            if w.ndim != 1 or not np.all(np.isfinite(w)) or np.any(w < 0):
                raise InvalidArgumentError("metric weights must be finite and nonnegative")
            if not np.any(w > 0):
                raise InvalidArgumentError("at least one metric weight must be positive")
            w.setflags(write=False)
            object.__setattr__(self, "weights", w)

    def resolve(self, m: int) -> np.ndarray:
        """Weight vector of length ``m``."""
        if self.weights is None:
            return np.ones(m)
        if self.weights.size != m:
            raise InvalidArgumentError(
                f"metric has {self.weights.size} weights but the lag window is {m}"
            )
        return np.asarray(self.weights)


@dataclass(frozen=True)
class SwapProposal:
    """Two distinct 0-based positions to exchange."""

    i: int
    j: int

    def check(self, n: int) -> None:
        if not (0 <= self.i < n and 0 <= self.j < n):
            raise InvalidArgumentError(f"swap indices ({self.i}, {self.j}) out of range for n={n}")
        if self.i == self.j:
            raise InvalidArgumentError("swap indices must be distinct")


def _check_lags(n: int, m: int) -> None:
    if not 1 <= m <= n:
        raise InvalidArgumentError(f"lag count m={m} must satisfy 1 <= m <= n={n}")


def fft_length(n: int, m: int) -> int:
    """Transform length that makes the first ``m`` lags free of wrap-around."""
    return sfft.next_fast_len(n + m - 1, real=True)


def autocorr_fft(x, m: int) -> np.ndarray:
    """First ``m`` autocorrelation lags of ``x`` in O(n log n)."""
    x = np.asarray(x, dtype=np.float64)
    n = x.size
    _check_lags(n, m)
    spec = sfft.rfft(x, fft_length(n, m))
    power = spec.real**2 + spec.imag**2
    return sfft.irfft(power, fft_length(n, m))[:m] / n


def autocorr_direct(x, m: int) -> np.ndarray:
    """Same quantity as :func:`autocorr_fft` by direct O(n*m) summation."""
    x = np.asarray(x, dtype=np.float64)
    n = x.size
    _check_lags(n, m)
    out = np.empty(m)
    for k in range(m):
        out[k] = np.sum(x[: n - k] * x[k:]) / n
    return out


def swap_delta(x, ax, proposal: SwapProposal | tuple[int, int]) -> np.ndarray:
    """Autocorrelation of ``x`` after exchanging two samples, in O(m).

    ``ax`` must be the current autocorrelation of ``x`` (not checked).
    Neither argument is modified.
    """
    x = np.asarray(x, dtype=np.float64)
    ax = np.asarray(ax, dtype=np.float64)
    if not isinstance(proposal, SwapProposal):
        proposal = SwapProposal(*proposal)
    proposal.check(x.size)
    _check_lags(x.size, ax.size)
    out = np.empty_like(ax)
    if x[proposal.i] == x[proposal.j]:
        out[:] = ax
        return out
    _kernels.swapped_autocorr_into(x, ax, proposal.i, proposal.j, out)
    return out


def _values(a) -> np.ndarray:
    if isinstance(a, TargetAutocorrelation):
        return a.values
    return np.asarray(a, dtype=np.float64)


def metric_d(target, ax, cfg: MetricConfig | None = None) -> float:
    """Weighted squared error ``sum_k w_k (A(k) - A_x(k))**2``."""
    a = _values(target)
    b = _values(ax)
    if a.shape != b.shape:
        raise InvalidArgumentError(f"lag counts differ: {a.size} vs {b.size}")
    w = (cfg or MetricConfig()).resolve(a.size)
    r = a - b
    return float(np.sum(w * r * r))


def psd_to_autocorr(psd, m: int, *, onesided: bool = False,
                    imag_tol: float = 1e-9) -> TargetAutocorrelation:
    """Target autocorrelation from a power spectral density.

    ``psd`` holds all ``N`` DFT bins ``0..N-1`` (two-sided, must be
    Hermitian-symmetric) or, with ``onesided=True``, bins ``0..N//2`` of a
    real spectrum. The inverse DFT includes the ``1/N`` factor, so lag 0 is
    the mean of the two-sided PSD, i.e. the mean power.
    """
    s = np.asarray(psd, dtype=np.float64)
    if s.ndim != 1 or s.size == 0:
        raise InvalidArgumentError("PSD must be a non-empty 1-D sequence")
    if not np.all(np.isfinite(s)):
        raise InvalidArgumentError("PSD contains non-finite values")
    if np.any(s < 0):
        raise InvalidArgumentError("PSD entries must be nonnegative")
    if onesided:
        nbins = 2 * (s.size - 1)
        if m > max(nbins, 1):
            raise InvalidArgumentError(f"lag count m={m} exceeds the {nbins} implied lags")
        acf = sfft.irfft(s, nbins) if nbins else s.copy()
    else:
        if m > s.size:
            raise InvalidArgumentError(f"lag count m={m} exceeds PSD length {s.size}")
        full = sfft.ifft(s)
        scale = np.max(np.abs(full))
        if scale > 0 and np.max(np.abs(full.imag)) > imag_tol * scale:
            raise InconsistentSpectrumError(
                "PSD is not Hermitian-symmetric; its inverse transform has an imaginary part"
            )
        acf = full.real
    if m < 1:
        raise InvalidArgumentError("lag count must be >= 1")
    return TargetAutocorrelation(acf[:m])


def vaf(target, ax) -> float:
    """Variance of the target accounted for by ``ax``, in percent."""
    a = _values(target)
    b = _values(ax)
    if a.shape != b.shape:
        raise InvalidArgumentError(f"lag counts differ: {a.size} vs {b.size}")
    var_a = np.var(a)
    if not var_a > 0:
        raise InvalidArgumentError("target has zero variance over the lag window")
    return float(100.0 * (1.0 - np.var(a - b) / var_a))
