import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import special, stats

from medlab.filters import median_filter
from medlab.median_stats import (QuantileSpec, alpha_of_zeta, beta_composition_cdf, empirical_quantile,
                                 median_second_moment_mc, nu_n, quantile_second_moment_mc,
                                 repeated_median_cdf, repeated_median_density)
from medlab.noise import builtin_models, get_model


def test_quantile_examples():
    assert empirical_quantile([3, 1, 2], 0.5) == 2
    assert empirical_quantile([1, 2, 3, 4], 0.5) == 3
    assert empirical_quantile([1, 2, 3, 4], 0.25) == 2


def test_quantile_rank_overflow():
    # 1 + floor(4 * 0.99) = 4 is fine, but m=1 with p=0.99 gives rank 1 too
    assert QuantileSpec(4, 0.99).rank == 4
    with pytest.raises(ValueError):
        QuantileSpec(4, 1.0)
    with pytest.raises(ValueError):
        empirical_quantile([], 0.5)


@given(st.lists(st.floats(-1e6, 1e6), min_size=1, max_size=40), st.floats(0.01, 0.99), st.randoms())
@settings(max_examples=300, deadline=None)
def test_quantile_permutation_invariant(xs, p, rnd):
    ys = list(xs)
    rnd.shuffle(ys)
    assert empirical_quantile(xs, p) == empirical_quantile(ys, p)
    assert empirical_quantile(xs, p) == sorted(xs)[math.floor(len(xs) * p)]


@given(st.lists(st.floats(-1e6, 1e6), min_size=1, max_size=40), st.floats(0.01, 0.98), st.floats(0.0, 0.5))
@settings(max_examples=300, deadline=None)
def test_quantile_monotone_in_p(xs, p, dp):
    q = min(p + dp, 0.99)
    assert empirical_quantile(xs, p) <= empirical_quantile(xs, q)


@given(st.lists(st.floats(-100, 100), min_size=3, max_size=31))
@settings(max_examples=200, deadline=None)
def test_median_convention_shared_with_filter(xs):
    n = len(xs)
    # a window wider than the grid covers everything for the middle index
    out = median_filter(np.array(xs, dtype=float), 0.99)
    mid = (n - 1) // 2
    if mid + math.floor(n * 0.99) >= n - 1 and mid - math.floor(n * 0.99) <= 0:
        assert out[mid] == empirical_quantile(xs, 0.5)


def test_alpha_branches():
    assert alpha_of_zeta(5) == 22 / 16 == 1.375
    assert alpha_of_zeta(2) == 2
    assert alpha_of_zeta(3) == 1.5
    assert (5 * 3 - 3) / (4 * 3 - 4) == 1.5
    assert alpha_of_zeta(math.inf) == 1.25
    with pytest.raises(ValueError):
        alpha_of_zeta(1.0)


def test_alpha_monotone_continuous():
    zs = np.concatenate([np.linspace(1.01, 2.99, 50), [3.0], np.linspace(3.0001, 100, 50)])
    vals = [alpha_of_zeta(z) for z in zs]
    assert all(a >= b for a, b in zip(vals, vals[1:]))
    assert alpha_of_zeta(3 + 1e-9) == pytest.approx(1.5, abs=1e-8)


def test_nu_branches():
    assert nu_n(4, 0.1) == pytest.approx(0.01, rel=1e-15)
    assert nu_n(2, 0.01) == pytest.approx(0.01, rel=1e-15)
    assert nu_n(3, math.exp(-1)) == pytest.approx(math.exp(-2), rel=1e-15)
    assert nu_n(math.inf, 0.2) == pytest.approx(0.04, rel=1e-15)
    with pytest.raises(ValueError):
        nu_n(4, 1.0)


def test_median_moment_m1_is_variance(gaussian):
    est = median_second_moment_mc(gaussian, 1, 20_000, 3)
    assert abs(est.estimate - 1.0) < 4 * est.stderr


def test_median_moment_requires_odd(gaussian):
    with pytest.raises(ValueError):
        median_second_moment_mc(gaussian, 4, 1000, 0)


def test_median_moment_cauchy_bracketing():
    c = get_model("cauchy")
    a = median_second_moment_mc(c, 101, 20_000, 1)
    b = median_second_moment_mc(c, 1001, 5_000, 2)
    ratio = (101 * a.estimate) / (1001 * b.estimate)
    assert 1 / 3 < ratio < 3


def test_quantile_moment_at_half_matches_median(gaussian):
    est, _ = quantile_second_moment_mc(gaussian, 101, 0.5, 5000, 8)
    med = median_second_moment_mc(gaussian, 101, 5000, 8)
    assert est.estimate == med.estimate


def test_quantile_moment_domain(gaussian):
    with pytest.raises(ValueError):
        quantile_second_moment_mc(gaussian, 101, 0.01, 1000, 0)


def test_quantile_moment_shape_gaussian(gaussian):
    ratios = [quantile_second_moment_mc(gaussian, 1001, p, 4000, 5)[1] for p in (0.6, 0.8, 0.95)]
    # a single constant bounds the ratio at every p; here all ratios stay O(1)
    assert max(ratios) < 10 and min(ratios) > 0


def test_quantile_moment_uniform_beta_oracle():
    u = get_model("uniform")
    m, p = 1001, 0.9
    k = 1 + math.floor(m * p)
    eu = k / (m + 1)
    eu2 = k * (k + 1) / ((m + 1) * (m + 2))
    # Z = sqrt(3) (2U - 1)
    oracle = 3 * (4 * eu2 - 4 * eu + 1)
    est, _ = quantile_second_moment_mc(u, m, p, 20_000, 4)
    assert est.estimate == pytest.approx(oracle, rel=0.10)


@pytest.mark.parametrize("m", [1, 3, 10, 50])
def test_beta_composition_matches_regularized_beta(m):
    for y in (1e-6, 0.1, 0.3, 0.5, 0.77, 0.999):
        assert beta_composition_cdf(m, y) == pytest.approx(special.betainc(m + 1, m + 1, y), abs=1e-10)


@pytest.mark.parametrize("name", [m.name for m in builtin_models()])
def test_repeated_cdf_m0_and_symmetry(name):
    model = get_model(name)
    for x in (-2.0, -0.3, 0.4, 1.7):
        assert repeated_median_cdf(model, 0, x) == model.cdf(x)
    for m in (1, 3, 10):
        assert repeated_median_cdf(model, m, 0.0) == pytest.approx(0.5, abs=1e-12)
        for x in (0.2, 1.0, 3.0):
            assert repeated_median_cdf(model, m, -x) == pytest.approx(1 - repeated_median_cdf(model, m, x), abs=1e-9)


def test_repeated_cdf_valid(gaussian):
    xs = np.linspace(-8, 8, 1000)
    vals = np.array([repeated_median_cdf(gaussian, 5, x) for x in xs])
    assert np.all(np.diff(vals) >= 0)
    assert vals[0] < 1e-9 and vals[-1] > 1 - 1e-9


def test_repeated_cdf_ks(gaussian):
    m = 3
    rng = np.random.default_rng(17)
    med = np.median(rng.standard_normal((20_000, 2 * m + 1)), axis=1) * math.sqrt(2 * m + 1)
    ks = stats.kstest(med, lambda x: np.array([repeated_median_cdf(gaussian, m, v) for v in np.atleast_1d(x)]))
    assert ks.statistic < 0.015


def test_repeated_density_tail_bound_reported(gaussian):
    # report the tail constant sup_x psi_m(x)(1+|x|)^4 across an m ladder
    xs = np.linspace(0, 40, 161)
    for name in ("gaussian", "cauchy"):
        model = get_model(name)
        sups = []
        for m in (7, 21, 101):
            vals = [repeated_median_density(model, m, x) * (1 + x) ** 4 for x in xs]
            sups.append(max(vals))
        assert all(np.isfinite(sups))
        print(name, "sup psi_m (1+|x|)^4 for m=7,21,101:", [round(s, 3) for s in sups])
