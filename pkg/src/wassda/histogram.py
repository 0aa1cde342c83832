"""Discrete probability histograms on uniform 1-D support grids.

A :class:`ProbabilityHistogram` is a vector of nonnegative masses summing
to one, attached to a :class:`SupportGrid` of strictly increasing, uniformly
spaced support points.  This module provides empirical binning, CDF and
quantile machinery, and piecewise-linear CDF matching between histograms.
All heavy lifting is vectorised numpy; instances are immutable and safe to
share across workers.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "SupportGrid",
    "ProbabilityHistogram",
    "EmpiricalSample",
    "build_grid",
    "bin_samples",
    "cdf_match",
]

_MASS_TOL = 1e-9
_SPACING_RTOL = 1e-12


@dataclass(frozen=True)
class SupportGrid:
    """Uniform grid of support locations for a discrete histogram.

    Parameters
    ----------
    points : ndarray
        Strictly increasing support locations (state units).  Spacing must
        be uniform to within a 1e-12 relative tolerance and at least two
        points are required.
    """

    points: np.ndarray

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=np.float64)
        if pts.ndim != 1 or pts.size < 2:
            raise ValueError(f"grid needs at least 2 points, got shape {pts.shape}")
        steps = np.diff(pts)
        if np.any(steps <= 0):
            raise ValueError("grid points must be strictly increasing")
        h = steps[0]
        if np.any(np.abs(steps - h) > _SPACING_RTOL * max(abs(pts[0]), abs(pts[-1]), 1.0)):
            raise ValueError("grid spacing must be uniform")
        pts.flags.writeable = False
        object.__setattr__(self, "points", pts)

    @property
    def k(self) -> int:
        return self.points.size

    @property
    def spacing(self) -> float:
        return float((self.points[-1] - self.points[0]) / (self.k - 1))

    @property
    def lo(self) -> float:
        return float(self.points[0])

    @property
    def hi(self) -> float:
        return float(self.points[-1])

    def shifted(self, offset: float) -> SupportGrid:
        """Grid translated by ``offset`` (same spacing and size)."""
        return SupportGrid(self.points + offset)


@dataclass(frozen=True)
class ProbabilityHistogram:
    """Probability masses over an explicit support grid.

    Masses must be nonnegative and sum to one within 1e-9.  The histogram
    is the discrete carrier for background, reference and analysis
    distributions throughout the toolkit.
    """

    grid: SupportGrid
    masses: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.masses, dtype=np.float64)
        if m.shape != (self.grid.k,):
            raise ValueError(
                f"masses length {m.shape} does not match grid size {self.grid.k}"
            )
        if np.any(m < 0):
            raise ValueError("histogram masses must be nonnegative")
        total = m.sum()
        if abs(total - 1.0) > _MASS_TOL:
            raise ValueError(f"histogram masses must sum to 1, got {total!r}")
        m.flags.writeable = False
        object.__setattr__(self, "masses", m)

    def mean(self) -> float:
        """Expected value: sum of support points weighted by mass."""
        return float(self.grid.points @ self.masses)

    def variance(self) -> float:
        """Second central moment of the histogram."""
        mu = self.mean()
        return float(((self.grid.points - mu) ** 2) @ self.masses)

    def cdf_values(self) -> np.ndarray:
        """Cumulative masses; nondecreasing, last element 1 within 1e-9."""
        return np.cumsum(self.masses)

    def quantile(self, u: float) -> float:
        """Left-continuous piecewise-linear quantile at level ``u``."""
        return _quantile(self.grid.points, self.cdf_values(), u)

    def is_degenerate(self) -> bool:
        """True when a single bin carries all the mass."""
        return bool(np.max(self.masses) >= 1.0 - _MASS_TOL)


@dataclass(frozen=True)
class EmpiricalSample:
    """Raw draws of a 1-D state variable, before binning."""

    values: np.ndarray
    count: int = field(default=-1)

    def __post_init__(self):
        v = np.atleast_1d(np.asarray(self.values, dtype=np.float64))
        if v.ndim != 1 or v.size < 1:
            raise ValueError("sample needs at least one value")
        count = v.size if self.count == -1 else self.count
        if count != v.size:
            raise ValueError(f"count {self.count} does not match {v.size} values")
        v.flags.writeable = False
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "count", count)


def build_grid(lo: float, hi: float, k: int) -> SupportGrid:
    """Uniform grid of ``k`` points with endpoints exactly ``lo`` and ``hi``."""
    if k < 2:
        raise ValueError(f"grid size must be >= 2, got {k}")
    if not lo < hi:
        raise ValueError(f"grid requires lo < hi, got [{lo}, {hi}]")
    return SupportGrid(np.linspace(lo, hi, k))


def bin_samples(sample: EmpiricalSample | np.ndarray, grid: SupportGrid) -> ProbabilityHistogram:
    """Bin raw draws onto a grid by nearest support point.

    Samples outside the grid are clamped into the boundary bins, so total
    mass is preserved exactly and the masses sum to one by construction.
    """
    values = sample.values if isinstance(sample, EmpiricalSample) else np.asarray(sample, dtype=np.float64)
    if values.size == 0:
        raise ValueError("cannot bin an empty sample")
    idx = np.rint((values - grid.lo) / grid.spacing).astype(np.intp)
    np.clip(idx, 0, grid.k - 1, out=idx)
    masses = np.bincount(idx, minlength=grid.k).astype(np.float64)
    masses /= values.size
    return ProbabilityHistogram(grid, masses)


def _quantile(points: np.ndarray, cdf: np.ndarray, u: float) -> float:
    # Q(u) = inf{x : F(x) >= u}, interpolated linearly inside a rising CDF
    # segment; flat (zero-mass) runs resolve to their left endpoint.
    j = int(np.searchsorted(cdf, u, side="left"))
    if j <= 0:
        return float(points[0])
    if j >= points.size:
        return float(points[-1])
    c0, c1 = cdf[j - 1], cdf[j]
    if c1 - c0 <= 1e-15:
        return float(points[j])
    t = (u - c0) / (c1 - c0)
    return float(points[j - 1] + t * (points[j] - points[j - 1]))


def cdf_match(
    value: float,
    source: ProbabilityHistogram,
    reference: ProbabilityHistogram,
) -> float:
    """Map ``value`` onto the reference distribution by CDF equating.

    Returns the reference quantile at the source CDF of ``value``, with
    piecewise-linear interpolation on both sides.  Values beyond the source
    support map to the corresponding reference endpoint; a degenerate
    source (all mass in one bin) maps everything to the reference median.
    """
    if not np.isfinite(value):
        raise ValueError(f"cdf_match requires a finite value, got {value!r}")
    if source.is_degenerate():
        return reference.quantile(0.5)
    src_pts = source.grid.points
    if value <= src_pts[0]:
        return float(reference.grid.points[0])
    if value >= src_pts[-1]:
        return float(reference.grid.points[-1])
    u = float(np.interp(value, src_pts, source.cdf_values()))
    return reference.quantile(u)
