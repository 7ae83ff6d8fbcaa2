"""Sampled signals and images on the grid {1..n}^dim, and the smoothing window."""
from __future__ import annotations

import io
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

# guards floor(n*h) against products like 2.9999999999996 when nh is meant to be 3
_RADIUS_SLACK = 1e-9


@dataclass(frozen=True)
class GridSample:
    """Real values on the grid, stored row-major with 0-based offsets.

    ``values[a]`` (dim 1) or ``values[a, b]`` (dim 2) holds the sample at grid
    index ``a + 1`` (resp. ``(a + 1, b + 1)``), i.e. at the point ``(a + 1)/n``.
    """

    dim: int
    n: int
    values: np.ndarray

    def __post_init__(self):
        if self.dim not in (1, 2):
            raise ValueError(f"dim must be 1 or 2, got {self.dim}")
        if self.n < 1:
            raise ValueError(f"n must be positive, got {self.n}")
        vals = np.array(self.values, dtype=np.float64)
        if vals.shape != (self.n,) * self.dim:
            raise ValueError(f"values shape {vals.shape} does not match n={self.n}, dim={self.dim}")
        if not np.all(np.isfinite(vals)):
            raise ValueError("grid values must be finite")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    def __eq__(self, other):
        if not isinstance(other, GridSample):
            return NotImplemented
        return self.dim == other.dim and self.n == other.n and np.array_equal(self.values, other.values)

    __hash__ = None

    def with_values(self, values) -> GridSample:
        return GridSample(self.dim, self.n, values)

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("dim,n\n")
        buf.write(f"{self.dim},{self.n}\n")
        if self.dim == 1:
            for v in self.values:
                buf.write(f"{float(v)!r}\n")
        else:
            for row in self.values:
                buf.write(",".join(repr(float(v)) for v in row) + "\n")
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> GridSample:
        lines = [ln.strip() for ln in text.splitlines() if ln.strip()]
        if not lines:
            raise ValueError("empty grid file")
        if lines[0].replace(" ", "").lower() == "dim,n":
            lines = lines[1:]
        dim, n = (int(tok) for tok in lines[0].split(","))
        rows = [[float(tok) for tok in ln.split(",")] for ln in lines[1:]]
        if dim == 1:
            values = np.array([r[0] for r in rows]) if all(len(r) == 1 for r in rows) else None
            if values is None:
                raise ValueError("dim=1 grid files hold one value per line")
        else:
            values = np.array(rows)
        return cls(dim, n, values)

    def save(self, path) -> None:
        Path(path).write_text(self.to_csv())

    @classmethod
    def load(cls, path) -> GridSample:
        return cls.from_csv(Path(path).read_text())


@dataclass(frozen=True)
class WindowSpec:
    h: float
    n: int

    def __post_init__(self):
        if not 0 < self.h < 1:
            raise ValueError(f"window width h must lie in (0, 1), got {self.h}")

    @property
    def radius(self) -> float:
        return self.n * self.h

    @property
    def radius_samples(self) -> int:
        return grid_radius(self.n, self.h)


def grid_radius(n: int, h: float) -> int:
    """Integer radius floor(n*h) of the discrete window."""
    return int(math.floor(n * h + _RADIUS_SLACK))


def disc_half_widths(radius: float) -> np.ndarray:
    """Row half-widths of the Euclidean disc {dx^2 + dy^2 <= radius^2}.

    Entry ``dy + r`` is the largest integer ``dx`` inside the disc on row ``dy``.
    """
    r = int(math.floor(radius + _RADIUS_SLACK))
    r2 = radius * radius + _RADIUS_SLACK
    out = np.empty(2 * r + 1, dtype=np.int64)
    for t, dy in enumerate(range(-r, r + 1)):
        w = math.isqrt(int(math.floor(r2 - dy * dy)))
        out[t] = w
    return out


def window_indices(n: int, dim: int, h: float, i) -> list:
    """Grid indices (1-based) within distance n*h of ``i``, clipped to the grid.

    Dimension 1 returns sorted ints; dimension 2 returns (row, col) tuples in
    row-major order.
    """
    if not 0 < h < 1:
        raise ValueError(f"h must lie in (0, 1), got {h}")
    idx = (i,) if dim == 1 else tuple(i)
    if len(idx) != dim or any(not 1 <= c <= n for c in idx):
        raise ValueError(f"index {i} is outside the grid {{1..{n}}}^{dim}")
    if dim == 1:
        r = grid_radius(n, h)
        return list(range(max(1, i - r), min(n, i + r) + 1))
    widths = disc_half_widths(n * h)
    r = (len(widths) - 1) // 2
    a, b = idx
    out = []
    for t, dy in enumerate(range(-r, r + 1)):
        row = a + dy
        if not 1 <= row <= n:
            continue
        w = int(widths[t])
        out.extend((row, col) for col in range(max(1, b - w), min(n, b + w) + 1))
    return out


def grid_points(n: int, dim: int) -> np.ndarray:
    """Coordinates i/n for every grid index; shape (n,) or (n, n, 2)."""
    axis = np.arange(1, n + 1) / n
    if dim == 1:
        return axis
    xx, yy = np.meshgrid(axis, axis, indexing="ij")
    return np.stack([xx, yy], axis=-1)


def sample_phantom(phantom, n: int) -> GridSample:
    """Noiseless samples f(i/n)."""
    pts = grid_points(n, phantom.dim)
    return GridSample(phantom.dim, n, phantom(pts))


def add_noise(clean: GridSample, noise, sigma: float, seed) -> GridSample:
    """Return clean + sigma * Z with Z drawn i.i.d. from ``noise``.

    ``seed`` may be an int, a SeedSequence or a Generator.
    """
    if sigma < 0:
        raise ValueError(f"sigma must be nonnegative, got {sigma}")
    if sigma == 0:
        return clean
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    z = noise.sample(rng, clean.values.shape)
    return clean.with_values(clean.values + sigma * z)
