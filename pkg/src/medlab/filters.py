"""Box (linear) filter, running median, two-scale median and iterated medians.

Every filter accepts a GridSample or a raw 1-D/2-D array and returns the same
kind. Windows are clipped to the grid. Medians are the order statistic of
rank 1 + floor(m/2) among the m window values.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .grid import GridSample, disc_half_widths, grid_radius


def _unwrap(sample):
    if isinstance(sample, GridSample):
        return sample.values, sample
    arr = np.ascontiguousarray(sample, dtype=np.float64)
    if arr.ndim not in (1, 2) or (arr.ndim == 2 and arr.shape[0] != arr.shape[1]):
        raise ValueError("expected a length-n vector or an n x n array")
    return arr, None


def _wrap(values, template):
    return template.with_values(values) if template is not None else values


def _check_h(h):
    if not 0 < h < 1:
        raise ValueError(f"window width must lie in (0, 1), got {h}")


def _linear_1d(x, r):
    n = x.shape[0]
    csum = np.concatenate([[0.0], np.cumsum(x)])
    idx = np.arange(n)
    lo = np.maximum(idx - r, 0)
    hi = np.minimum(idx + r, n - 1)
    return (csum[hi + 1] - csum[lo]) / (hi - lo + 1)


def box_mean(values: np.ndarray, n: int, h: float) -> np.ndarray:
    """Window averages of a raw array (grid side n, width h)."""
    if values.ndim == 1:
        r = grid_radius(n, h)
        return values.copy() if r == 0 else _linear_1d(values, r)
    widths = disc_half_widths(n * h)
    if len(widths) == 1 and widths[0] == 0:
        return values.copy()
    return _kernels.box_mean_2d(np.ascontiguousarray(values), widths)


def running_median(values: np.ndarray, n: int, h: float) -> np.ndarray:
    """Window medians of a raw array (grid side n, width h)."""
    if values.ndim == 1:
        r = grid_radius(n, h)
        return values.copy() if r == 0 else _kernels.running_median_1d(np.ascontiguousarray(values), r)
    widths = disc_half_widths(n * h)
    if len(widths) == 1 and widths[0] == 0:
        return values.copy()
    return _kernels.running_median_2d(np.ascontiguousarray(values), widths)


def linear_filter(sample, h: float):
    """Average over the window of radius n*h around each grid point."""
    _check_h(h)
    x, tmpl = _unwrap(sample)
    return _wrap(box_mean(x, x.shape[0], h), tmpl)


def median_filter(sample, h: float):
    """Median over the window of radius n*h around each grid point."""
    _check_h(h)
    x, tmpl = _unwrap(sample)
    return _wrap(running_median(x, x.shape[0], h), tmpl)


@dataclass(frozen=True)
class TwoScaleSpec:
    """Block side and coarse-grid layout for a two-scale median at grid side n."""

    n: int
    h1: float
    h2: float

    def __post_init__(self):
        if not 0 < self.h1 < self.h2 < 1:
            raise ValueError(f"need 0 < h1 < h2 < 1, got h1={self.h1}, h2={self.h2}")
        if self.block < 1:
            raise ValueError(f"block side round(n*h1) must be >= 1 (n={self.n}, h1={self.h1})")
        if self.n_coarse < 3:
            raise ValueError(f"coarse grid has {self.n_coarse} < 3 cells (n={self.n}, h1={self.h1})")

    @property
    def block(self) -> int:
        return int(round(self.n * self.h1))

    @property
    def n_coarse(self) -> int:
        return self.n // self.block

    def cell_of(self) -> np.ndarray:
        """Coarse cell of each fine offset 0..n-1; the trailing remainder joins the last cell."""
        return np.minimum(np.arange(self.n) // self.block, self.n_coarse - 1)


def block_medians(x: np.ndarray, spec: TwoScaleSpec) -> np.ndarray:
    """Median of the samples in each coarse cell."""
    x = np.ascontiguousarray(x, dtype=np.float64)
    if x.ndim == 1:
        return _kernels.block_medians_1d(x, spec.block, spec.n_coarse)
    return _kernels.block_medians_2d(x, spec.block, spec.n_coarse)


def running_medians(values: np.ndarray, n: int, widths) -> list:
    """Running medians of one array at several widths."""
    if values.ndim == 1:
        radii = np.array([grid_radius(n, h) for h in widths], dtype=np.int64)
        return list(_kernels.running_median_1d_multi(np.ascontiguousarray(values), radii))
    return [running_median(values, n, h) for h in widths]


def upsample(coarse: np.ndarray, spec: TwoScaleSpec) -> np.ndarray:
    cell = spec.cell_of()
    if coarse.ndim == 1:
        return coarse[cell]
    return coarse[np.ix_(cell, cell)]


def two_scale_median(sample, h1: float, h2: float):
    """Block medians at scale h1, running median at scale h2 on the block grid,
    then piecewise-constant interpolation back to the fine grid."""
    x, tmpl = _unwrap(sample)
    spec = TwoScaleSpec(x.shape[0], h1, h2)
    coarse = block_medians(x, spec)
    smoothed = running_median(coarse, spec.n_coarse, h2)
    return _wrap(upsample(smoothed, spec), tmpl)


def iterated_median(sample, widths):
    """Median filters of the given widths applied left to right; [] is the identity."""
    out = sample
    for h in widths:
        out = median_filter(out, h)
    if not widths:
        x, tmpl = _unwrap(sample)
        return _wrap(x.copy(), tmpl)
    return out
