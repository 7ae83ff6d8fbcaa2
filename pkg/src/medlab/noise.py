"""Symmetric noise distributions and the contaminated-median machinery."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy import stats

SQRT3 = math.sqrt(3.0)


@dataclass(frozen=True)
class NoiseModel:
    """A noise law with density, CDF, quantile function and sampler.

    ``zeta`` is the polynomial tail exponent sup{s : pdf(x)(1+|x|)^s bounded};
    it is ``math.inf`` for laws with faster-than-polynomial tails.
    """

    name: str
    pdf: Callable
    cdf: Callable
    ppf: Callable
    draw: Callable = field(repr=False)
    zeta: float
    variance: float
    continuous_density: bool = True

    def sample(self, rng: np.random.Generator, size) -> np.ndarray:
        return self.draw(rng, size)


def _scipy_model(name, dist, draw, zeta, variance, continuous_density=True):
    return NoiseModel(name, dist.pdf, dist.cdf, dist.ppf, draw, zeta, variance, continuous_density)


_MODELS = {
    "gaussian": _scipy_model(
        "gaussian", stats.norm(), lambda rng, size: rng.standard_normal(size), math.inf, 1.0
    ),
    "laplace": _scipy_model(
        "laplace", stats.laplace(), lambda rng, size: rng.laplace(0.0, 1.0, size), math.inf, 2.0
    ),
    "cauchy": _scipy_model(
        "cauchy", stats.cauchy(), lambda rng, size: rng.standard_cauchy(size), 2.0, math.inf
    ),
    # density jumps at +-sqrt(3); kept because it is a standard example, flagged below
    "uniform": _scipy_model(
        "uniform",
        stats.uniform(loc=-SQRT3, scale=2 * SQRT3),
        lambda rng, size: rng.uniform(-SQRT3, SQRT3, size),
        math.inf,
        1.0,
        continuous_density=False,
    ),
}


def builtin_models() -> list[NoiseModel]:
    return list(_MODELS.values())


def get_model(name: str) -> NoiseModel:
    try:
        return _MODELS[name]
    except KeyError:
        raise ValueError(f"unknown noise model {name!r}; choose from {', '.join(_MODELS)}") from None


@dataclass(frozen=True)
class MixtureCdf:
    """(1 - eps) * base(t) + eps * base(t - delta)."""

    eps: float
    delta: float
    base: NoiseModel

    def __post_init__(self):
        if not 0 <= self.eps < 1:
            raise ValueError(f"eps must lie in [0, 1), got {self.eps}")
        if self.delta < 0:
            raise ValueError(f"delta must be nonnegative, got {self.delta}")

    def __call__(self, t):
        return (1 - self.eps) * self.base.cdf(t) + self.eps * self.base.cdf(np.asarray(t) - self.delta)


def population_contaminated_median(eps: float, delta: float, base: NoiseModel,
                                   tol: float = 1e-10, max_iter: int = 200) -> float:
    """Median mu(eps, delta) of the mixture (1-eps)*base + eps*base(. - delta).

    Solved by bisection; for eps < 1/2 the root lies in [0, delta].
    """
    if not 0 <= eps < 0.5:
        raise ValueError(f"eps must lie in [0, 1/2), got {eps}")
    if delta < 0:
        raise ValueError(f"delta must be nonnegative, got {delta}")
    mix = MixtureCdf(eps, delta, base)
    lo, hi = 0.0, float(delta)
    if mix(lo) > 0.5 or mix(hi) < 0.5:
        lo, hi = -delta - 10.0, delta + 10.0
        while mix(lo) > 0.5:
            lo *= 2
        while mix(hi) < 0.5:
            hi *= 2
    for _ in range(max_iter):
        if hi - lo <= tol:
            break
        mid = 0.5 * (lo + hi)
        if mix(mid) < 0.5:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def contaminated_median_sample(n_good: int, m_bad: int, delta: float, base: NoiseModel, seed,
                               size=None):
    """Median of n_good base draws together with m_bad draws shifted by delta.

    With ``size`` given, returns that many independent medians as an array.
    """
    from .median_stats import median_rank

    if n_good < 1 or m_bad < 0:
        raise ValueError("need n_good >= 1 and m_bad >= 0")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    shape = (1 if size is None else size, n_good + m_bad)
    z = base.sample(rng, shape)
    z[:, n_good:] += delta
    k = median_rank(n_good + m_bad)
    med = np.partition(z, k, axis=1)[:, k]
    return float(med[0]) if size is None else med
