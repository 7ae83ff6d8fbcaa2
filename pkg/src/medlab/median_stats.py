"""Order statistics of noise samples: quantiles, moment estimates, repeated medians."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate

_CHUNK_ELEMS = 2_000_000


@dataclass(frozen=True)
class MCEstimate:
    estimate: float
    stderr: float
    reps: int
    seed: int

    def csv(self) -> str:
        return f"{self.estimate!r},{self.stderr!r},{self.reps},{self.seed}"


@dataclass(frozen=True)
class QuantileSpec:
    m: int
    p: float

    def __post_init__(self):
        if self.m < 1:
            raise ValueError("sample size must be positive")
        if not 0 < self.p < 1:
            raise ValueError(f"p must lie in (0, 1), got {self.p}")
        if self.rank > self.m:
            raise ValueError(f"rank 1+floor(m*p) = {self.rank} exceeds m = {self.m}")

    @property
    def rank(self) -> int:
        return 1 + math.floor(self.m * self.p)


def median_rank(m: int) -> int:
    """0-based position of the median order statistic among m values."""
    return m // 2


def empirical_quantile(sample, p: float) -> float:
    """Order statistic of rank 1 + floor(m*p) (1-based)."""
    x = np.asarray(sample, dtype=np.float64).ravel()
    if x.size == 0:
        raise ValueError("empty sample")
    k = QuantileSpec(x.size, p).rank - 1
    return float(np.partition(x, k)[k])


def _order_stat_moment(model, m, k, reps, seed, power=2):
    rng = np.random.default_rng(seed)
    chunk = max(1, _CHUNK_ELEMS // m)
    vals = np.empty(reps)
    done = 0
    while done < reps:
        take = min(chunk, reps - done)
        z = model.sample(rng, (take, m))
        vals[done:done + take] = np.partition(z, k, axis=1)[:, k] ** power
        done += take
    est = float(vals.mean())
    se = float(vals.std(ddof=1) / math.sqrt(reps))
    return MCEstimate(est, se, reps, seed)


def median_second_moment_mc(model, m: int, reps: int, seed: int) -> MCEstimate:
    """Monte Carlo estimate of E[Med_m(Z)^2] for an odd sample size m."""
    if m < 1 or m % 2 == 0:
        raise ValueError(f"m must be a positive odd integer, got {m}")
    if reps < 2:
        raise ValueError("need at least two replicates")
    return _order_stat_moment(model, m, median_rank(m), reps, seed)


def alpha_of_zeta(zeta: float) -> float:
    """Quantile-variance blowup exponent for tail exponent zeta."""
    if not zeta > 1:
        raise ValueError(f"zeta must exceed 1, got {zeta}")
    if math.isinf(zeta):
        return 1.25
    if zeta > 3:
        return (5 * zeta - 3) / (4 * zeta - 4)
    return zeta / (zeta - 1)


def nu_n(zeta: float, sigma: float) -> float:
    """Near-edge risk factor for noise level sigma in (0, 1)."""
    if not zeta > 1:
        raise ValueError(f"zeta must exceed 1, got {zeta}")
    if not 0 < sigma < 1:
        raise ValueError(f"sigma must lie in (0, 1), got {sigma}")
    if zeta > 3:
        return sigma ** 2
    if zeta == 3:
        return sigma ** 2 * math.log(1 / sigma)
    return sigma ** (zeta - 1)


def quantile_second_moment_mc(model, m: int, p: float, reps: int, seed: int):
    """Estimate E[Z_{m,p}^2]; also returns its ratio to (p(1-p))^(2 - 2*alpha).

    p must lie in (2*alpha/m, 1 - 2*alpha/m).
    """
    alpha = alpha_of_zeta(model.zeta)
    lo, hi = 2 * alpha / m, 1 - 2 * alpha / m
    if not lo < p < hi:
        raise ValueError(f"p={p} outside the admissible range ({lo:.4g}, {hi:.4g})")
    k = QuantileSpec(m, p).rank - 1
    est = _order_stat_moment(model, m, k, reps, seed)
    ratio = est.estimate / (p * (1 - p)) ** (2 - 2 * alpha)
    return est, ratio


def _log_beta_norm(m: int) -> float:
    # log((2m+1)! / (m!)^2)
    return math.lgamma(2 * m + 2) - 2 * math.lgamma(m + 1)


def beta_composition_cdf(m: int, y: float) -> float:
    """(2m+1)!/(m!)^2 * integral_0^y (u(1-u))^m du by adaptive quadrature."""
    if y <= 0:
        return 0.0
    if y >= 1:
        return 1.0
    if y > 0.5:
        return 1.0 - beta_composition_cdf(m, 1.0 - y)
    c = _log_beta_norm(m)

    def integrand(u):
        return math.exp(c + m * (math.log(u) + math.log1p(-u))) if 0 < u < 1 else 0.0

    val, _ = integrate.quad(integrand, 0.0, y, epsabs=1e-13, epsrel=1e-12, limit=200)
    return min(max(val, 0.0), 1.0)


def repeated_median_cdf(model, m: int, x: float) -> float:
    """CDF at x of sqrt(2m+1) times the median of 2m+1 draws from ``model``."""
    if m < 0:
        raise ValueError("m must be nonnegative")
    scale = math.sqrt(2 * m + 1)
    y = float(model.cdf(x / scale))
    if m == 0:
        return y
    return beta_composition_cdf(m, y)


def repeated_median_density(model, m: int, x: float, step: float = 1e-4) -> float:
    """Density of the scaled repeated median by central differences of its CDF.

    Evaluated on the negative half-line, where the CDF is small and accurate.
    """
    x = -abs(x)
    return (repeated_median_cdf(model, m, x + step) - repeated_median_cdf(model, m, x - step)) / (2 * step)
