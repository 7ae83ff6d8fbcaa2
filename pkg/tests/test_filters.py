from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from medlab.filters import (TwoScaleSpec, iterated_median, linear_filter, median_filter, two_scale_median)
from medlab.grid import GridSample, sample_phantom, window_indices
from medlab.median_stats import empirical_quantile
from medlab.phantoms import block_centred_step, canonical_step, step_at

EXACT = 1e-12
PROPS = settings(max_examples=1000, deadline=None)


@st.composite
def filter_case(draw):
    """A filter, its widths and a random array on a small grid."""
    dim = draw(st.sampled_from([1, 1, 2]))
    n = draw(st.integers(6, 40) if dim == 1 else st.integers(6, 12))
    kind = draw(st.sampled_from(["linear", "median", "two-scale"]))
    if kind == "two-scale":
        b = draw(st.integers(1, n // 3))
        h = b / n
        h2 = draw(st.floats(h + 1e-6, 0.99))
        apply = lambda x: two_scale_median(x, h, h2)
    else:
        h = draw(st.floats(0.01, 0.99))
        fn = linear_filter if kind == "linear" else median_filter
        apply = lambda x: fn(x, h)
    seed = draw(st.integers(0, 2 ** 32 - 1))
    x = np.random.default_rng(seed).standard_normal((n,) * dim)
    if draw(st.booleans()):
        x = np.round(x, 1)  # plenty of ties
    return kind, h, apply, x, np.random.default_rng(seed + 1)


def _tol(kind):
    return EXACT if kind == "linear" else 0.0


def test_linear_example():
    out = linear_filter(np.array([0.0, 0, 1, 1]), 0.25)
    assert np.allclose(out, [0, 1 / 3, 2 / 3, 1], rtol=0, atol=1e-15)


def test_median_example():
    assert np.array_equal(median_filter(np.array([0.0, 0, 1, 1]), 0.25), [0, 0, 1, 1])


@pytest.mark.parametrize("dim", [1, 2])
def test_constants_fixed(dim):
    x = np.full((9,) * dim, 0.3)
    for out in (linear_filter(x, 0.3), median_filter(x, 0.3), two_scale_median(x, 1 / 9, 0.5)):
        assert np.allclose(out, 0.3, rtol=0, atol=1e-15)
    assert np.array_equal(median_filter(x, 0.3), x)


def test_grid_sample_in_and_out():
    s = GridSample(1, 8, np.arange(8.0))
    out = median_filter(s, 0.2)
    assert isinstance(out, GridSample) and out.n == 8


def test_window_fraction_at_figure_configuration():
    n, h = 512, 0.125
    x = sample_phantom(canonical_step(), n).values
    i = n // 2 - 64 // 2
    out = linear_filter(x, h)
    win = window_indices(n, 1, h, i)
    frac = sum(1 for j in win if j / n >= 0.5) / len(win)
    assert out[i - 1] == pytest.approx(frac, abs=1e-15)
    assert frac == 33 / 129


def test_median_preserves_clean_step():
    n = 512
    x = sample_phantom(canonical_step(), n).values
    for h in (1 / n, 0.01, 0.125, 0.3):
        assert np.array_equal(median_filter(x, h), x)


def test_iterated_chain_preserves_step():
    n = 64
    x = sample_phantom(canonical_step(), n).values
    assert np.array_equal(iterated_median(x, [3 / n, 5 / n, 7 / n]), x)


def test_iterated_base_cases(rng):
    x = rng.standard_normal(32)
    assert np.array_equal(iterated_median(x, []), x)
    assert np.array_equal(iterated_median(x, [0.1]), median_filter(x, 0.1))


@pytest.mark.parametrize("n,h1,h2", [(16, 1 / 4, 0.3), (32, 1 / 8, 1 / 4), (64, 1 / 16, 0.2), (48, 1 / 12, 0.3)])
def test_two_scale_block_aligned_step(n, h1, h2):
    # jump between fine indices n/2 and n/2 + 1, a cell boundary
    b = round(n * h1)
    x = sample_phantom(step_at((n // 2 + 0.5) / n), n).values
    assert (n // 2) % b == 0 and x[n // 2 - 1] == 0 and x[n // 2] == 1
    assert np.array_equal(two_scale_median(x, h1, h2), x)


def test_two_scale_tied_coarse_window():
    # coarse values 0, 0, 1, 1: the clipped coarse windows of cells 2 and 3
    # hold all four cells, a 2:2 tie resolved upward
    x = sample_phantom(step_at(8.5 / 16), 16).values
    out = two_scale_median(x, 1 / 4, 1 / 2)
    assert np.array_equal(out[:4], np.zeros(4)) and np.array_equal(out[8:], np.ones(8))


def test_two_scale_remainder_blocks(rng):
    n = 17
    x = rng.standard_normal(n)
    spec = TwoScaleSpec(n, 4 / n, 0.5)
    assert spec.block == 4 and spec.n_coarse == 4
    assert list(spec.cell_of()[-5:]) == [3] * 5
    out = two_scale_median(x, 4 / n, 0.5)
    assert np.all(out[12:] == out[-1])


def test_two_scale_determinism(rng):
    x = rng.standard_normal((40, 40))
    assert np.array_equal(two_scale_median(x, 0.05, 0.2), two_scale_median(x.copy(), 0.05, 0.2))


def test_two_scale_errors():
    with pytest.raises(ValueError):
        two_scale_median(np.zeros(16), 0.5, 0.25)
    with pytest.raises(ValueError):
        two_scale_median(np.zeros(16), 0.01, 0.25)
    with pytest.raises(ValueError):
        two_scale_median(np.zeros(16), 0.4, 0.6)


def test_width_errors():
    for h in (0.0, 1.0, -0.1):
        with pytest.raises(ValueError):
            median_filter(np.zeros(8), h)
        with pytest.raises(ValueError):
            linear_filter(np.zeros(8), h)


def test_block_centred_step_worst_case():
    # the jump splits the middle cell, so no choice of h2 repairs it at sigma = 0
    n, b = 64, 8
    f = block_centred_step(n, b)
    x = sample_phantom(f, n).values
    assert not np.array_equal(two_scale_median(x, b / n, 0.2), x)


@pytest.mark.parametrize("n,h", [(20, 0.1), (33, 0.2), (16, 0.05)])
def test_median_matches_brute_force(rng, n, h):
    x = np.round(rng.standard_normal(n), 1)
    out = median_filter(x, h)
    for i in range(1, n + 1):
        w = np.sort(x[np.array(window_indices(n, 1, h, i)) - 1])
        assert out[i - 1] == w[len(w) // 2]
    y = np.round(rng.standard_normal((n, n)), 1)
    out2 = median_filter(y, h)
    lin2 = linear_filter(y, h)
    for i in range(1, n + 1, 3):
        for j in range(1, n + 1, 4):
            rows, cols = zip(*window_indices(n, 2, h, (i, j)))
            w = np.sort(y[np.array(rows) - 1, np.array(cols) - 1])
            assert out2[i - 1, j - 1] == w[len(w) // 2]
            assert lin2[i - 1, j - 1] == pytest.approx(w.mean(), abs=1e-12)


@given(filter_case())
@PROPS
def test_monotone(case):
    kind, _, apply, x, rng = case
    y = x + np.abs(rng.standard_normal(x.shape)) * rng.integers(0, 2, x.shape)
    assert np.all(apply(x) <= apply(y) + _tol(kind))


@given(filter_case())
@PROPS
def test_sup_norm_lipschitz(case):
    kind, _, apply, x, rng = case
    y = x + rng.uniform(-1, 1, x.shape) * rng.exponential()
    assert np.max(np.abs(apply(x) - apply(y))) <= np.max(np.abs(x - y)) + _tol(kind)


@given(filter_case(), st.floats(0, 10), st.floats(-10, 10))
@PROPS
def test_affine_equivariance(case, a, b):
    kind, _, apply, x, _ = case
    lhs = apply(a * x + b)
    rhs = a * apply(x) + b
    if kind == "linear":
        assert np.allclose(lhs, rhs, rtol=0, atol=1e-12 * (1 + abs(a) + abs(b)))
    else:
        # x -> a*x + b stays monotone after rounding, so order statistics map exactly
        assert np.array_equal(lhs, rhs)


@given(filter_case())
@PROPS
def test_range_preservation(case):
    kind, h, apply, x, _ = case
    out = apply(x)
    n, dim = x.shape[0], x.ndim
    if kind == "two-scale":
        assert x.min() <= out.min() and out.max() <= x.max()
        return
    tol = _tol(kind)
    for idx in np.ndindex(*x.shape):
        one_based = idx[0] + 1 if dim == 1 else (idx[0] + 1, idx[1] + 1)
        win = window_indices(n, dim, h, one_based)
        pos = np.array(win) - 1
        vals = x[pos] if dim == 1 else x[pos[:, 0], pos[:, 1]]
        assert vals.min() - tol <= out[idx] <= vals.max() + tol


@given(st.integers(1, 60), st.integers(0, 59), st.integers(0, 2 ** 32 - 1))
@PROPS
def test_mixture_sandwich(n_good, m_bad, seed):
    m_bad = m_bad % n_good  # m_bad < n_good
    rng = np.random.default_rng(seed)
    good = np.round(rng.standard_normal(n_good), 1)
    bad = rng.choice([-1e6, 1e6, 0.0], size=m_bad) + rng.standard_normal(m_bad)
    window = np.concatenate([good, bad])
    rng.shuffle(window)
    med = empirical_quantile(window, Fraction(1, 2))
    m = n_good + m_bad
    eps = Fraction(m_bad, m)
    lo = empirical_quantile(good, (Fraction(1, 2) - eps) / (1 - eps))
    hi = empirical_quantile(good, Fraction(1, 2) / (1 - eps))
    assert lo <= med <= hi
