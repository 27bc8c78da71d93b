"""Initial signals: inverse transform sampling and Gaussian noise."""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.integrate import cumulative_trapezoid

from .sigcore import ExactPdf, InvalidArgumentError, RangePenalty, as_signal

__all__ = [
    "TabulatedCdf",
    "integrate_pdf",
    "inverse_transform_sample",
    "gaussian_init",
    "default_init_sigma",
]

# A tabulated density whose trapezoid mass is further than this from 1 is
# probably mis-specified (wrong support or units).
MASS_WARN_TOL = 1e-3


@dataclass(frozen=True)
class TabulatedCdf:
    grid: np.ndarray
    cdf: np.ndarray

    def __post_init__(self):
        if self.grid.size != self.cdf.size or self.grid.size < 2:
            raise InvalidArgumentError("grid and cdf must have equal length >= 2")
        if np.any(np.diff(self.grid) <= 0):
            raise InvalidArgumentError("cdf grid must be strictly increasing")
        if np.any(np.diff(self.cdf) < 0) or self.cdf[0] != 0.0 or self.cdf[-1] != 1.0:
            raise InvalidArgumentError("cdf must be nondecreasing from exactly 0 to exactly 1")

    def __call__(self, values) -> np.ndarray:
        """Evaluate the piecewise-linear CDF."""
        return np.interp(values, self.grid, self.cdf, left=0.0, right=1.0)


def integrate_pdf(pdf: ExactPdf, grid_size: int | None = None) -> TabulatedCdf:
    """Cumulative trapezoid integral of ``pdf`` on a uniform grid of ``grid_size`` points.

    When ``grid_size`` differs from the tabulation length, the density is
    linearly interpolated onto the new grid first. The result is divided by
    the total mass so the last value is exactly 1; a mass that is not within
    1e-3 of 1 triggers a :class:`UserWarning`.
    """
    n_grid = pdf.density.size if grid_size is None else int(grid_size)
    if n_grid < 2:
        raise InvalidArgumentError(f"grid_size must be >= 2, got {n_grid}")
    if np.any(pdf.density < 0):
        raise InvalidArgumentError("density must be nonnegative")
    grid = np.linspace(pdf.lower, pdf.upper, n_grid)
    if n_grid == pdf.density.size:
        dens = pdf.density
    else:
        dens = np.interp(grid, pdf.grid, pdf.density)
    cum = cumulative_trapezoid(dens, grid, initial=0.0)
    mass = cum[-1]
    if not mass > 0:
        raise InvalidArgumentError("density has zero total mass")
    if abs(mass - 1.0) > MASS_WARN_TOL:
        warnings.warn(
            f"tabulated density integrates to {mass:.6g}, renormalizing", UserWarning, stacklevel=2
        )
    cdf = cum / mass
    cdf[-1] = 1.0
    # Division can leave tiny non-monotone steps where the density is zero.
    cdf = np.maximum.accumulate(cdf)
    return TabulatedCdf(grid, cdf)


def inverse_transform_sample(cdf: TabulatedCdf, n: int, rng: np.random.Generator) -> np.ndarray:
    """Draw ``n`` samples through the piecewise-linear inverse of ``cdf``."""
    if n < 2:
        raise InvalidArgumentError(f"signal length must be >= 2, got {n}")
    u = rng.random(n)
    hi = np.searchsorted(cdf.cdf, u, side="right")
    # u is in [0, 1) and cdf[-1] == 1, so 1 <= hi <= N-1 and cdf[hi] > u >= cdf[hi-1].
    lo = hi - 1
    c0 = cdf.cdf[lo]
    c1 = cdf.cdf[hi]
    g0 = cdf.grid[lo]
    g1 = cdf.grid[hi]
    x = g0 + (u - c0) / (c1 - c0) * (g1 - g0)
    np.clip(x, cdf.grid[0], cdf.grid[-1], out=x)
    return as_signal(x, copy=False)


def gaussian_init(n: int, sigma: float, rng: np.random.Generator) -> np.ndarray:
    """``n`` independent N(0, sigma**2) samples."""
    if not sigma > 0:
        raise InvalidArgumentError(f"sigma must be positive, got {sigma}")
    if n < 2:
        raise InvalidArgumentError(f"signal length must be >= 2, got {n}")
    return as_signal(sigma * rng.standard_normal(n), copy=False)


def default_init_sigma(penalty: RangePenalty) -> float:
    """Half of the half-width of the allowed band (0.25 for [-0.5, 0.5])."""
    return 0.25 * (penalty.upper - penalty.lower)
