"""Closed planar curves, complexes of curves, and grid-distance queries."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Optional

import numpy as np
from scipy.spatial import cKDTree

from .grid import grid_points, window_indices


@dataclass(frozen=True, eq=False)
class Curve:
    """Closed curve represented by a dense polyline cache.

    ``points`` holds gamma(s_k) for increasing arclengths, without repeating
    the start point. Distance queries are exact against the cached vertices,
    so they overestimate the true distance by at most ``spacing``.
    ``contains`` optionally gives an exact inside test; otherwise the
    even-odd rule on the polyline is used.
    """

    points: np.ndarray
    length: float
    kappa: float
    theta: float
    contains: Optional[Callable] = field(default=None, repr=False)

    @property
    def spacing(self) -> float:
        seg = np.diff(np.vstack([self.points, self.points[:1]]), axis=0)
        return float(np.max(np.hypot(seg[:, 0], seg[:, 1])))

    @classmethod
    def from_arclength(cls, gamma, length, kappa, theta, contains=None, max_spacing=None):
        """Cache gamma(s), s in [0, length), at spacing <= min(1e-3, 1/(4 kappa))."""
        limit = 1e-3 if kappa <= 0 else min(1e-3, 1 / (4 * kappa))
        if max_spacing is not None:
            limit = min(limit, max_spacing)
        k = max(8, math.ceil(length / limit))
        s = np.arange(k) * (length / k)
        pts = np.asarray(gamma(s), dtype=np.float64)
        return cls(pts, float(length), float(kappa), float(theta), contains)

    @classmethod
    def from_polyline(cls, vertices, kappa=math.inf, theta=math.inf, max_spacing=1e-3):
        """Closed polyline through ``vertices``, resampled to ``max_spacing``."""
        v = np.asarray(vertices, dtype=np.float64)
        if v.ndim != 2 or v.shape[1] != 2 or len(v) < 3:
            raise ValueError("a closed polyline needs at least three (x, y) vertices")
        if np.allclose(v[0], v[-1]):
            v = v[:-1]
        closed = np.vstack([v, v[:1]])
        seg = np.hypot(*np.diff(closed, axis=0).T)
        cum = np.concatenate([[0.0], np.cumsum(seg)])
        length = float(cum[-1])
        k = max(len(v), math.ceil(length / max_spacing))
        s = np.arange(k) * (length / k)
        pts = np.column_stack([np.interp(s, cum, closed[:, 0]), np.interp(s, cum, closed[:, 1])])
        # keep the corners exactly
        pts = np.vstack([pts, v])
        order = np.argsort(np.concatenate([s, cum[:-1]]), kind="stable")
        pts = pts[order]
        keep = np.ones(len(pts), dtype=bool)
        keep[1:] = np.any(np.diff(pts, axis=0) != 0, axis=1)
        return cls(pts[keep], length, kappa, theta, None)

    def inside(self, xy) -> np.ndarray:
        xy = np.asarray(xy, dtype=np.float64)
        if self.contains is not None:
            return np.asarray(self.contains(xy), dtype=bool)
        return _even_odd(self.points, xy)

    def check_invariants(self, stride: int = 1, rtol: float = 1e-2) -> dict:
        """Numerical chord-arc and curvature checks on (a subsample of) the cache."""
        full = np.vstack([self.points, self.points[:1]])
        cum = np.concatenate([[0.0], np.cumsum(np.hypot(*np.diff(full, axis=0).T))])
        total = cum[-1]
        pts = self.points[::stride]
        s = cum[:-1][::stride]
        k = len(pts)
        gap = np.diff(np.concatenate([s, [total]]))
        closed = bool(gap[-1] <= 2 * gap[:-1].max()) if k > 1 else False
        diff = pts[:, None, :] - pts[None, :, :]
        chord = np.hypot(diff[..., 0], diff[..., 1])
        arc = np.abs(s[:, None] - s[None, :])
        other = total - arc
        off = ~np.eye(k, dtype=bool)
        # the shorter of the two arcs: the longer one diverges as the chord shrinks
        ratio = np.max(np.minimum(arc, other)[off] / chord[off]) if k > 1 else 0.0
        prev = np.roll(pts, 1, axis=0)
        nxt = np.roll(pts, -1, axis=0)
        # Menger curvature of consecutive triples: 4 * area / (product of sides)
        a = np.hypot(*(pts - prev).T)
        b = np.hypot(*(nxt - pts).T)
        c = np.hypot(*(nxt - prev).T)
        cross = np.abs((pts - prev)[:, 0] * (nxt - pts)[:, 1] - (pts - prev)[:, 1] * (nxt - pts)[:, 0])
        curv = 2 * cross / (a * b * c)
        kappa_hat = float(np.max(curv))
        return {
            "closed": closed,
            "chord_arc": float(ratio),
            "curvature": kappa_hat,
            "chord_arc_ok": bool(ratio <= self.theta * (1 + rtol)),
            "curvature_ok": bool(kappa_hat <= self.kappa * (1 + rtol)),
        }


def _even_odd(poly, xy):
    flat = xy.reshape(-1, 2)
    x, y = flat[:, 0], flat[:, 1]
    inside = np.zeros(len(flat), dtype=bool)
    x0, y0 = poly[:, 0], poly[:, 1]
    x1, y1 = np.roll(x0, -1), np.roll(y0, -1)
    for a, b, c, d in zip(x0, y0, x1, y1):
        crosses = (b > y) != (d > y)
        with np.errstate(divide="ignore", invalid="ignore"):
            xcross = a + (y - b) * (c - a) / (d - b)
        inside ^= crosses & (x < xcross)
    return inside.reshape(xy.shape[:-1])


def circle(center=(0.5, 0.5), radius=0.25) -> Curve:
    cx, cy = center

    def gamma(s):
        t = s / radius
        return np.column_stack([cx + radius * np.cos(t), cy + radius * np.sin(t)])

    def contains(xy):
        return (xy[..., 0] - cx) ** 2 + (xy[..., 1] - cy) ** 2 <= radius ** 2

    length = 2 * math.pi * radius
    # chord-arc ratio of a circle peaks at antipodal points: (pi r)/(2r)
    return Curve.from_arclength(gamma, length, 1 / radius, math.pi / 2, contains)


@dataclass(frozen=True, eq=False)
class Complex:
    curves: tuple
    eta: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "curves", tuple(self.curves))
        if not self.curves:
            raise ValueError("a complex needs at least one curve")
        pts = np.vstack([c.points for c in self.curves])
        object.__setattr__(self, "_tree", cKDTree(pts))

    @property
    def length(self) -> float:
        return float(sum(c.length for c in self.curves))

    def distance(self, xy) -> np.ndarray:
        xy = np.asarray(xy, dtype=np.float64)
        d, _ = self._tree.query(xy.reshape(-1, 2))
        return d.reshape(xy.shape[:-1])

    def region(self, xy) -> np.ndarray:
        """Integer label: bit k set when the point is inside curve k."""
        xy = np.asarray(xy, dtype=np.float64)
        label = np.zeros(xy.shape[:-1], dtype=np.int64)
        for k, c in enumerate(self.curves):
            label |= c.inside(xy).astype(np.int64) << k
        return label

    def separation_report(self) -> dict:
        """Boundary distance and pairwise minimum distance between curves."""
        bdry = min(
            float(np.min(np.minimum.reduce([c.points[:, 0], c.points[:, 1], 1 - c.points[:, 0], 1 - c.points[:, 1]])))
            for c in self.curves
        )
        pair = math.inf
        for a in range(len(self.curves)):
            for b in range(a + 1, len(self.curves)):
                d, _ = cKDTree(self.curves[b].points).query(self.curves[a].points)
                pair = min(pair, float(d.min()))
        return {"boundary": bdry, "pairwise": pair,
                "separated": bdry >= self.eta and pair >= self.eta}

    @classmethod
    def load(cls, path, eta: float = 0.0) -> Complex:
        """Read curves from blocks of ``x y`` lines separated by blank lines."""
        blocks, cur = [], []
        for line in Path(path).read_text().splitlines():
            if line.strip():
                cur.append([float(t) for t in line.split()])
            elif cur:
                blocks.append(cur)
                cur = []
        if cur:
            blocks.append(cur)
        return cls(tuple(Curve.from_polyline(b) for b in blocks), eta)


def distance_to_complex(x, complex_: Complex):
    """Distance from point(s) to the cached vertices of the complex."""
    if complex_ is None:
        raise ValueError("empty complex")
    d = complex_.distance(np.asarray(x, dtype=np.float64))
    return float(d) if np.ndim(d) == 0 else d


def grid_distances(n: int, complex_: Complex) -> np.ndarray:
    return complex_.distance(grid_points(n, 2))


def near_set(n: int, h: float, complex_: Complex) -> np.ndarray:
    """1-based (row, col) indices of grid points within distance h of the complex."""
    if not 0 < h < 1:
        raise ValueError(f"h must lie in (0, 1), got {h}")
    mask = grid_distances(n, complex_) <= h
    return np.argwhere(mask) + 1


def annulus_band_count(n: int, ell: int, complex_: Complex, distances=None) -> int:
    """Number of grid points with ell <= n * delta(i) < ell + 1."""
    if not 0 <= ell <= n:
        raise ValueError(f"ell must lie in [0, n], got {ell}")
    d = grid_distances(n, complex_) if distances is None else distances
    nd = n * d
    return int(np.count_nonzero((nd >= ell) & (nd < ell + 1)))


def good_fraction(n: int, h: float, i, phantom) -> tuple[float, float]:
    """Share rho of the window on the same side of the discontinuities as i.

    Returns (rho, p) with p = 1/(2 rho) clamped to [1/2, 1).
    """
    idx = window_indices(n, phantom.dim, h, i)
    if phantom.dim == 1:
        pts = np.array(idx, dtype=np.float64) / n
        own = phantom.region(np.array([i / n]))[0]
    else:
        pts = np.array(idx, dtype=np.float64) / n
        own = phantom.region(np.array([[i[0] / n, i[1] / n]]))[0]
    same = np.count_nonzero(phantom.region(pts) == own)
    rho = same / len(idx)
    p = min(max(1 / (2 * rho), 0.5), math.nextafter(1.0, 0.0))
    return rho, p
