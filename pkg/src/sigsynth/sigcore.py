"""Domain types and seeded randomness shared by the rest of the package.

Signals and autocorrelation estimates are plain ``float64`` numpy arrays.
The small validating constructors here (:func:`as_signal`,
:class:`TargetAutocorrelation`, the PDF specs) are the single place where
non-finite input is rejected.

Random streams are :class:`numpy.random.Generator` objects backed by
``PCG64`` (PCG XSL RR 128/64, numpy >= 1.17 stream definition). Gaussian
variates come from ``Generator.standard_normal``, which uses numpy's
256-layer ziggurat. Uniform integers come from ``Generator.integers``
(Lemire's bounded method). All three are stable across numpy releases for
a fixed seed, which is what the reproducibility guarantees rest on.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Union

import numpy as np

__all__ = [
    "InvalidArgumentError",
    "InconsistentSpectrumError",
    "NumericalFailure",
    "as_signal",
    "TargetAutocorrelation",
    "ExactPdf",
    "RangePenalty",
    "PdfSpec",
    "Mode",
    "RunConfig",
    "TraceEntry",
    "RunReport",
    "make_rng",
]

UINT64_MAX = 2**64 - 1


class InvalidArgumentError(ValueError):
    """An argument violates a documented precondition."""


class InconsistentSpectrumError(ValueError):
    """A spectrum does not correspond to a real autocorrelation."""


class NumericalFailure(RuntimeError):
    """A run produced non-finite values."""


def make_rng(seed: int) -> np.random.Generator:
    """Return a deterministic random stream for an unsigned 64-bit seed."""
    seed = int(seed)
    if not 0 <= seed <= UINT64_MAX:
        raise InvalidArgumentError(f"seed must be an unsigned 64-bit integer, got {seed}")
    return np.random.Generator(np.random.PCG64(seed))


def as_signal(values, *, copy: bool = True) -> np.ndarray:
    """Validate ``values`` as a signal: 1-D, finite, float64, length >= 2."""
    x = np.array(values, dtype=np.float64, copy=copy)
    if x.ndim != 1:
        raise InvalidArgumentError(f"signal must be one-dimensional, got shape {x.shape}")
    if x.size < 2:
        raise InvalidArgumentError(f"signal length must be >= 2, got {x.size}")
    if not np.all(np.isfinite(x)):
        raise InvalidArgumentError("signal contains non-finite values")
    return x


class TargetAutocorrelation:
    """Target autocorrelation over lags ``0..m-1``.

    Values use the same biased, non-mean-subtracted normalization as
    :func:`sigsynth.spectral.autocorr_fft`, so ``values[0]`` is the target
    mean power.
    """

    __slots__ = ("values",)

    def __init__(self, values):
        a = np.array(values, dtype=np.float64)
        if a.ndim != 1 or a.size < 1:
            raise InvalidArgumentError("target autocorrelation must be a non-empty 1-D sequence")
        if not np.all(np.isfinite(a)):
            raise InvalidArgumentError("target autocorrelation contains non-finite values")
        if a[0] <= 0:
            raise InvalidArgumentError(f"lag-0 target value must be positive, got {a[0]}")
        a.setflags(write=False)
        self.values = a

    @property
    def m(self) -> int:
        return self.values.size

    def __len__(self) -> int:
        return self.values.size

    def __repr__(self) -> str:
        return f"TargetAutocorrelation(m={self.m}, lag0={self.values[0]:.6g})"


@dataclass(frozen=True)
class ExactPdf:
    """Density tabulated at ``density.size`` uniformly spaced points on ``[lower, upper]``."""

    lower: float
    upper: float
    density: np.ndarray

    def __post_init__(self):
        d = np.asarray(self.density, dtype=np.float64)
        if d.ndim != 1 or d.size < 2:
            raise InvalidArgumentError("tabulated density needs at least two points")
        if not np.all(np.isfinite(d)):
            raise InvalidArgumentError("tabulated density contains non-finite values")
        if not self.lower < self.upper:
            raise InvalidArgumentError(f"need lower < upper, got [{self.lower}, {self.upper}]")
        object.__setattr__(self, "density", d)

    @property
    def grid(self) -> np.ndarray:
        return np.linspace(self.lower, self.upper, self.density.size)

    @classmethod
    def from_function(cls, func, lower: float, upper: float, points: int = 4097) -> "ExactPdf":
        """Tabulate a vectorized density ``func`` on a uniform grid."""
        grid = np.linspace(lower, upper, points)
        return cls(lower, upper, np.asarray(func(grid), dtype=np.float64))

    @classmethod
    def uniform(cls, lower: float = -0.5, upper: float = 0.5, points: int = 1001) -> "ExactPdf":
        return cls(lower, upper, np.full(points, 1.0 / (upper - lower)))


@dataclass(frozen=True)
class RangePenalty:
    """Linear penalty ``weight * distance`` for values outside ``[lower, upper]``."""

    lower: float = -0.5
    upper: float = 0.5
    weight: float = 1.0

    def __post_init__(self):
        if not self.lower < self.upper:
            raise InvalidArgumentError(f"need lower < upper, got [{self.lower}, {self.upper}]")
        if not self.weight > 0:
            raise InvalidArgumentError(f"penalty weight must be positive, got {self.weight}")


PdfSpec = Union[ExactPdf, RangePenalty]


class Mode(str, enum.Enum):
    INTERCHANGE = "interchange"
    OPTIMIZATION_ONLY = "optimize"
    COMBINED = "combined"


@dataclass
class RunConfig:
    """Parameters of a single generation run.

    ``steps`` counts swap proposals in interchange mode and outer iterations
    (one gradient step plus ``swaps_per_gradient_step`` proposals) in the
    other two modes. ``time_budget`` (seconds) stops a run early; with
    ``steps=None`` it is the only stopping rule.
    """

    steps: int | None = 1000
    mode: Mode = Mode.COMBINED
    swaps_per_gradient_step: int = 1
    rng_seed: int = 0
    learning_rate: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    trace_interval: int = 100
    time_budget: float | None = None
    init_sigma: float | None = None
    # Combined/optimize only: start from inverse transform samples of an
    # ExactPdf instead of Gaussian noise.
    init_from_pdf: bool = False
    resync_interval: int = 10**6
    stationarity_windows: int = 16

    def __post_init__(self):
        self.mode = Mode(self.mode)
        if self.steps is None and self.time_budget is None:
            raise InvalidArgumentError("either steps or time_budget must be set")
        if self.steps is not None and self.steps < 0:
            raise InvalidArgumentError(f"steps must be >= 0, got {self.steps}")
        if self.time_budget is not None and not self.time_budget > 0:
            raise InvalidArgumentError(f"time_budget must be positive, got {self.time_budget}")
        if self.swaps_per_gradient_step < 0:
            raise InvalidArgumentError("swaps_per_gradient_step must be >= 0")
        if self.trace_interval < 1:
            raise InvalidArgumentError("trace_interval must be >= 1")
        if self.resync_interval < 1:
            raise InvalidArgumentError("resync_interval must be >= 1")
        if not 0 <= int(self.rng_seed) <= UINT64_MAX:
            raise InvalidArgumentError("rng_seed must be an unsigned 64-bit integer")
        if not self.learning_rate > 0:
            raise InvalidArgumentError("learning_rate must be positive")
        if not (0 <= self.beta1 < 1 and 0 <= self.beta2 < 1):
            raise InvalidArgumentError("Adam decay rates must lie in [0, 1)")
        if self.init_sigma is not None and not self.init_sigma > 0:
            raise InvalidArgumentError("init_sigma must be positive")


@dataclass(frozen=True)
class TraceEntry:
    elapsed_seconds: float
    step: int
    metric_d: float
    total_loss: float


@dataclass
class RunReport:
    final_signal: np.ndarray
    trace: list[TraceEntry]
    final_metric: float
    vaf_percent: float
    stationarity: object  # diagnostics.StationarityScore, or None for degenerate signals
    total_seconds: float
    mode: Mode = Mode.COMBINED
    steps_run: int = 0
    accepted_swaps: int = 0
    proposed_swaps: int = 0
    initial_signal: np.ndarray | None = field(default=None, repr=False)
