"""Test functions with known discontinuity sets: steps, discs, squares, random cartoons."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .geometry import Complex, Curve, circle


class _Const:
    """Constant field; picklable and exactly Lipschitz-0."""

    def __init__(self, c):
        self.c = c

    def __call__(self, x):
        x = np.asarray(x)
        return np.full(x.shape if x.ndim <= 1 else x.shape[:-1], self.c)

    def __repr__(self):
        return f"const({self.c})"


@dataclass(frozen=True)
class _ClampedAffine:
    """clip(offset + slope . (x - anchor), 0, 1); Lipschitz with constant |slope|."""

    offset: float
    slope: tuple
    anchor: tuple

    def __call__(self, x):
        x = np.asarray(x, dtype=np.float64)
        if len(self.slope) == 1:
            v = self.offset + self.slope[0] * (x - self.anchor[0])
        else:
            v = self.offset + (x[..., 0] - self.anchor[0]) * self.slope[0] + (x[..., 1] - self.anchor[1]) * self.slope[1]
        return np.clip(v, 0.0, 1.0)


@dataclass(frozen=True, eq=False)
class Phantom1D:
    """Piecewise function on [0, 1]; a breakpoint belongs to the piece on its right."""

    breakpoints: tuple
    pieces: tuple
    beta: float = 0.0
    eta: float = 0.0
    name: str = "phantom1d"
    dim: int = field(default=1, init=False)

    def __post_init__(self):
        bp = tuple(float(b) for b in self.breakpoints)
        if list(bp) != sorted(bp) or any(not 0 < b < 1 for b in bp):
            raise ValueError("breakpoints must be sorted and inside (0, 1)")
        if len(self.pieces) != len(bp) + 1:
            raise ValueError("need one piece per interval")
        object.__setattr__(self, "breakpoints", bp)
        object.__setattr__(self, "pieces", tuple(self.pieces))

    @property
    def N(self) -> int:
        return len(self.breakpoints)

    def region(self, x) -> np.ndarray:
        return np.searchsorted(np.asarray(self.breakpoints), np.asarray(x, dtype=np.float64), side="right")

    def __call__(self, x):
        x = np.asarray(x, dtype=np.float64)
        lab = self.region(x)
        out = np.empty(x.shape)
        for k, piece in enumerate(self.pieces):
            sel = lab == k
            if np.any(sel):
                out[sel] = piece(x[sel])
        return out if out.ndim else float(out)


@dataclass(frozen=True, eq=False)
class Phantom2D:
    """Cartoon image: one Lipschitz field inside the complex, another outside."""

    complex: Complex
    inside_field: Callable
    outside_field: Callable
    beta: float = 0.0
    name: str = "phantom2d"
    smooth_curves: bool = True
    dim: int = field(default=2, init=False)

    @property
    def N(self) -> int:
        return len(self.complex.curves)

    @property
    def eta(self) -> float:
        return self.complex.eta

    def region(self, xy) -> np.ndarray:
        return self.complex.region(xy)

    def __call__(self, xy):
        xy = np.asarray(xy, dtype=np.float64)
        shape = xy.shape[:-1]
        flat = xy.reshape(-1, 2)
        inside = self.region(flat) != 0
        out = np.where(inside, self.inside_field(flat), self.outside_field(flat)).reshape(shape)
        return out if out.ndim else float(out)


def step_at(t: float, name: str | None = None) -> Phantom1D:
    """Indicator of [t, 1]."""
    return Phantom1D((t,), (_Const(0.0), _Const(1.0)), beta=0.0, eta=min(t, 1 - t),
                     name=name or f"step@{t:g}")


def canonical_step() -> Phantom1D:
    """Indicator of [1/2, 1]: f(1/2) = 1."""
    return step_at(0.5, name="step")


def block_centred_step(n: int, block: int) -> Phantom1D:
    """Step whose jump splits the length-``block`` cell containing index n/2 in half.

    Cells are {kb+1, ..., (k+1)b}; this is the least favourable step location
    for a first-stage block median with cell side ``block``.
    """
    if block < 1:
        raise ValueError("block side must be positive")
    k = (n // 2 - 1) // block
    t = (k * block + block // 2 + 0.5) / n
    return step_at(t, name=f"step-midblock{block}")


def canonical_disc() -> Phantom2D:
    """Indicator of the closed disc of radius 1/4 centred at (1/2, 1/2)."""
    cx = Complex((circle((0.5, 0.5), 0.25),), eta=0.25)
    return Phantom2D(cx, _Const(1.0), _Const(0.0), beta=0.0, name="disc")


def canonical_square(zeta_side: float, lam: float = 4.0) -> Phantom2D:
    """Indicator of the axis-aligned square of side ``zeta_side`` centred at (1/2, 1/2)."""
    if not 0 < zeta_side < min(0.5, lam / 4):
        raise ValueError(f"side must lie in (0, min(1/2, lam/4)) = (0, {min(0.5, lam / 4):g}), got {zeta_side}")
    a, b = 0.5 - zeta_side / 2, 0.5 + zeta_side / 2
    corners = [(a, a), (b, a), (b, b), (a, b)]
    curve = Curve.from_polyline(corners, kappa=math.inf, theta=2.0)

    def contains(xy):
        return (np.abs(xy[..., 0] - 0.5) <= zeta_side / 2) & (np.abs(xy[..., 1] - 0.5) <= zeta_side / 2)

    curve = Curve(curve.points, curve.length, curve.kappa, curve.theta, contains)
    cx = Complex((curve,), eta=a)
    return Phantom2D(cx, _Const(1.0), _Const(0.0), beta=0.0, name=f"square{zeta_side:g}",
                     smooth_curves=False)


def constant(c: float, dim: int = 1) -> Phantom1D | Phantom2D:
    if dim == 1:
        return Phantom1D((), (_Const(c),), name=f"constant{c:g}")
    return Phantom2D(Complex((circle(),)), _Const(c), _Const(c), name=f"constant{c:g}")


def _random_piece(rng, beta, lo, hi):
    slope = rng.uniform(-beta, beta) if beta > 0 else 0.0
    return _ClampedAffine(float(rng.uniform(0, 1)), (float(slope),), (float(0.5 * (lo + hi)),))


def random_phantom_1d(N: int, beta: float, eta: float, seed) -> Phantom1D:
    """Random member of SEP-PLIP(eta, beta, N) (PLIP when eta = 0)."""
    if N < 1:
        raise ValueError("N must be at least 1")
    if beta < 0:
        raise ValueError("beta must be nonnegative")
    if not 0 <= eta < 1 / (2 * N):
        raise ValueError(f"eta={eta} infeasible for N={N}; need 0 <= eta < 1/(2N)")
    rng = np.random.default_rng(seed)
    slack = 1 - (N + 1) * eta
    u = np.sort(rng.uniform(0, slack, N))
    bp = eta + u + eta * np.arange(N)
    bp = np.clip(bp, np.nextafter(0.0, 1.0), np.nextafter(1.0, 0.0))
    edges = np.concatenate([[0.0], bp, [1.0]])
    pieces = [_random_piece(rng, beta, edges[k], edges[k + 1]) for k in range(N + 1)]
    return Phantom1D(tuple(bp), tuple(pieces), beta=beta, eta=eta, name=f"random1d:{seed}")


def random_phantom_2d(seed, beta: float = 1.0, eta: float = 0.1) -> Phantom2D:
    """Random smooth blob with Lipschitz fields inside and outside."""
    rng = np.random.default_rng(seed)
    c = rng.uniform(0.4, 0.6, 2)
    r0 = rng.uniform(0.12, 0.18)
    amp = rng.uniform(0.0, 0.12)
    freq = int(rng.integers(2, 5))
    phase = rng.uniform(0, 2 * math.pi)

    def radius(phi):
        return r0 * (1 + amp * np.cos(freq * phi + phase))

    phi = np.linspace(0, 2 * math.pi, 8192, endpoint=False)
    verts = np.column_stack([c[0] + radius(phi) * np.cos(phi), c[1] + radius(phi) * np.sin(phi)])
    poly = Curve.from_polyline(verts)
    # generous numeric bounds, verified by check_invariants in the tests
    inv = Curve(poly.points, poly.length, math.inf, math.inf).check_invariants(stride=8)

    def contains(xy):
        dx, dy = xy[..., 0] - c[0], xy[..., 1] - c[1]
        return np.hypot(dx, dy) <= radius(np.arctan2(dy, dx))

    curve = Curve(poly.points, poly.length, inv["curvature"] * 1.05, inv["chord_arc"] * 1.05, contains)
    inside = _ClampedAffine(float(rng.uniform(0.6, 1.0)), tuple(rng.uniform(-beta, beta, 2) / math.sqrt(2)), tuple(c))
    outside = _ClampedAffine(float(rng.uniform(0.0, 0.4)), tuple(rng.uniform(-beta, beta, 2) / math.sqrt(2)), tuple(c))
    return Phantom2D(Complex((curve,), eta=eta), inside, outside, beta=beta, name=f"random2d:{seed}")


def check_membership(phantom, seed=0, pairs: int = 1000) -> dict:
    """Sampled class-membership checks for a phantom's declared parameters."""
    rng = np.random.default_rng(seed)
    tol = 1e-12
    out = {}
    if phantom.dim == 1:
        xs = rng.uniform(0, 1, 10 * pairs)
        vals = phantom(xs)
        out["range"] = bool(np.all((vals >= 0) & (vals <= 1)))
        edges = np.concatenate([[0.0], phantom.breakpoints, [1.0]])
        lip = True
        for k, piece in enumerate(phantom.pieces):
            a = rng.uniform(edges[k], edges[k + 1], pairs)
            b = rng.uniform(edges[k], edges[k + 1], pairs)
            gap = np.abs(a - b)
            ok = np.abs(piece(a) - piece(b)) <= phantom.beta * gap + tol
            lip &= bool(np.all(ok))
        out["lipschitz"] = lip
        bp = np.asarray(phantom.breakpoints)
        if phantom.eta > 0 and len(bp):
            sep = np.all(np.minimum(bp, 1 - bp) >= phantom.eta - tol)
            sep &= bool(np.all(np.diff(bp) >= phantom.eta - tol))
            out["separated"] = bool(sep)
    else:
        xy = rng.uniform(0, 1, (10 * pairs, 2))
        vals = phantom(xy)
        out["range"] = bool(np.all((vals >= 0) & (vals <= 1)))
        lip = True
        for fld in (phantom.inside_field, phantom.outside_field):
            a = rng.uniform(0, 1, (pairs, 2))
            b = rng.uniform(0, 1, (pairs, 2))
            gap = np.hypot(*(a - b).T)
            lip &= bool(np.all(np.abs(fld(a) - fld(b)) <= phantom.beta * gap + tol))
        out["lipschitz"] = lip
        if phantom.eta > 0:
            out["separated"] = phantom.complex.separation_report()["separated"]
        if phantom.smooth_curves:
            inv = [c.check_invariants(stride=4) for c in phantom.complex.curves]
            out["curves"] = all(r["closed"] and r["chord_arc_ok"] and r["curvature_ok"] for r in inv)
    out["ok"] = all(out.values())
    return out


def resolve_phantom(name: str):
    """Look up a phantom by CLI name."""
    if name == "step":
        return canonical_step()
    if name == "disc":
        return canonical_disc()
    if name == "square" or name.startswith("square:"):
        side = float(name.split(":", 1)[1]) if ":" in name else 0.25
        return canonical_square(side)
    if name.startswith("random1d:"):
        return random_phantom_1d(3, 1.0, 0.1, int(name.split(":", 1)[1]))
    if name.startswith("random2d:"):
        return random_phantom_2d(int(name.split(":", 1)[1]))
    raise ValueError(f"unknown phantom {name!r}; use step, disc, square, random1d:<seed> or random2d:<seed>")
