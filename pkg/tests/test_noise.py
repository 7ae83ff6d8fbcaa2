import math

import numpy as np
import pytest
from scipy import stats

from medlab.noise import (MixtureCdf, builtin_models, contaminated_median_sample, get_model,
                          population_contaminated_median)

MODELS = [m.name for m in builtin_models()]
PROBS = np.round(np.arange(0.01, 1.0, 0.01), 2)


def test_builtin_metadata():
    meta = {m.name: (m.zeta, m.variance) for m in builtin_models()}
    assert meta["gaussian"] == (math.inf, 1.0)
    assert meta["cauchy"] == (2.0, math.inf)
    assert meta["laplace"] == (math.inf, 2.0)
    assert meta["uniform"] == (math.inf, 1.0)


def test_uniform_flagged_discontinuous():
    assert not get_model("uniform").continuous_density
    assert all(m.continuous_density for m in builtin_models() if m.name != "uniform")


@pytest.mark.parametrize("name", MODELS)
def test_quantile_round_trip(name):
    m = get_model(name)
    assert m.cdf(0.0) == pytest.approx(0.5, abs=1e-15)
    np.testing.assert_allclose(m.cdf(m.ppf(PROBS)), PROBS, atol=1e-9)
    xs = m.ppf(PROBS)
    np.testing.assert_allclose(m.ppf(m.cdf(xs)), xs, atol=1e-9)
    assert m.zeta > 1


@pytest.mark.parametrize("name", MODELS)
def test_symmetric_unimodal(name):
    m = get_model(name)
    xs = np.linspace(0.01, 5, 200)
    np.testing.assert_allclose(m.pdf(xs), m.pdf(-xs), rtol=1e-12)
    assert np.all(np.diff(m.pdf(xs)) <= 1e-15)


@pytest.mark.parametrize("name", ["gaussian", "laplace", "uniform"])
def test_sample_variance_matches_metadata(name):
    m = get_model(name)
    z = m.sample(np.random.default_rng(1), 200_000)
    assert z.var() == pytest.approx(m.variance, rel=0.03)


def test_unknown_model():
    with pytest.raises(ValueError, match="unknown noise model"):
        get_model("poisson")


def test_mixture_cdf_limits(gaussian):
    f = MixtureCdf(0.3, 2.0, gaussian)
    assert f(-50) == pytest.approx(0.0, abs=1e-12)
    assert f(50) == pytest.approx(1.0, abs=1e-12)
    ts = np.linspace(-5, 7, 500)
    assert np.all(np.diff(f(ts)) >= 0)


def test_mu_no_contamination(gaussian):
    assert population_contaminated_median(0.0, 5.0, gaussian) == pytest.approx(0.0, abs=1e-9)


def test_mu_zero_shift(gaussian):
    assert population_contaminated_median(0.3, 0.0, gaussian) == pytest.approx(0.0, abs=1e-9)


def test_mu_large_shift(gaussian):
    # for a far-away contaminant, (1 - eps) * Phi(mu) = 1/2
    oracle = stats.norm.ppf(0.5 / 0.75)
    assert oracle == pytest.approx(0.4307, abs=1e-4)
    assert population_contaminated_median(0.25, 50.0, gaussian) == pytest.approx(oracle, abs=1e-3)


@pytest.mark.parametrize("name", MODELS)
def test_mu_solves_mixture(name):
    m = get_model(name)
    for eps, delta in [(0.1, 1.0), (0.2, 5.0), (0.45, 3.0)]:
        mu = population_contaminated_median(eps, delta, m)
        assert 0 <= mu <= delta
        assert MixtureCdf(eps, delta, m)(mu) == pytest.approx(0.5, abs=1e-8)


@pytest.mark.parametrize("name", MODELS)
def test_mu_monotone_in_eps_and_delta(name):
    m = get_model(name)
    eps_grid = [0.0, 0.05, 0.1, 0.2, 0.3, 0.4, 0.49]
    delta_grid = [0.0, 0.5, 1.0, 2.0, 5.0, 20.0]
    mu = np.array([[population_contaminated_median(e, d, m) for d in delta_grid] for e in eps_grid])
    assert np.all(np.diff(mu, axis=0) >= -1e-9)
    assert np.all(np.diff(mu, axis=1) >= -1e-9)


def test_mu_domain(gaussian):
    with pytest.raises(ValueError):
        population_contaminated_median(0.5, 1.0, gaussian)
    with pytest.raises(ValueError):
        population_contaminated_median(0.1, -1.0, gaussian)


def test_single_draw_is_the_draw(gaussian):
    draw = contaminated_median_sample(1, 0, 3.0, gaussian, 9)
    expect = gaussian.sample(np.random.default_rng(9), (1, 1))[0, 0]
    assert draw == expect


def test_median_of_three_sign_symmetry(gaussian):
    meds = contaminated_median_sample(3, 0, 0.0, gaussian, 4, size=20_000)
    frac = np.mean(meds > 0)
    assert abs(frac - 0.5) < 4 * math.sqrt(0.25 / 20_000)


def test_contaminated_coverage(gaussian):
    meds = contaminated_median_sample(80, 20, 5.0, gaussian, 13, size=10_000)
    mu = population_contaminated_median(0.2, 5.0, gaussian)
    assert np.mean(meds >= mu) >= 0.5 - 3 * math.sqrt(0.25 / 10_000)


@pytest.mark.parametrize("eps0", [0.1, 0.15, 0.19])
def test_mse_lower_bound(gaussian, eps0):
    meds = contaminated_median_sample(80, 20, 5.0, gaussian, 21, size=10_000)
    sq = meds ** 2
    se = sq.std(ddof=1) / math.sqrt(sq.size)
    mu0 = population_contaminated_median(eps0, 5.0, gaussian)
    assert sq.mean() >= mu0 ** 2 / 2 - 3 * se
