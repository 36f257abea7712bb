import math

import numpy as np
import pytest
from scipy import integrate
from scipy.stats import norm

from _mc import mc_cell, normalised_mle
from skewbm.exceptions import ValidationError
from skewbm.simulate import make_rng, sample_mixed_normal
from skewbm.stats import (
    EmpiricalDistribution,
    histogram,
    ks_distance,
    ks_two_sample,
    local_time_gaussian_cdf,
    mixed_normal_cdf,
    rate_fit,
    sample_skewness,
    scaled_local_time_cdf,
)


def test_mixed_normal_cdf_symmetry():
    assert mixed_normal_cdf(0.0) == pytest.approx(0.5, abs=1e-15)
    x = np.linspace(-6, 6, 121)
    np.testing.assert_allclose(mixed_normal_cdf(x) + mixed_normal_cdf(-x), 1.0, atol=1e-13)


def test_mixed_normal_cdf_monotone_with_positive_derivative():
    x = np.linspace(-8, 8, 3201)
    F = mixed_normal_cdf(x)
    h = 1e-4
    dF = (mixed_normal_cdf(x + h) - mixed_normal_cdf(x - h)) / (2 * h)
    assert np.all(np.diff(F) > 0) and np.all(dF > 0)
    assert 0 < F[0] and F[-1] < 1


@pytest.mark.parametrize("x", [-3.0, -0.4, 0.7, 2.5, 10.0])
def test_mixed_normal_cdf_vs_quad(x):
    f = lambda l: norm.cdf(x * math.sqrt(l)) * 2 * norm.pdf(l)
    want = integrate.quad(f, 0, 0.01, epsabs=1e-14)[0] + integrate.quad(f, 0.01, 40, epsabs=1e-14, limit=200)[0]
    assert mixed_normal_cdf(x) == pytest.approx(want, abs=1e-10)


def _ks_upper_bound(samples, cdf, grid):
    # rigorous bound on sup |F_emp - F| from a grid and monotonicity of both
    emp = EmpiricalDistribution.from_samples(samples)
    left = np.searchsorted(emp.sorted_samples, grid, side="left") / emp.n_samples
    right = emp.cdf(grid)
    F = cdf(grid)
    up = np.max(right[:-1] - F[:-1])
    up = max(up, np.max(left[1:] - F[:-1]))
    down = np.max(F[1:] - right[:-1])
    tails = max(right[0], 1 - left[-1])
    return max(up, down, tails, F[0], 1 - F[-1])


@pytest.mark.slow
def test_mixed_normal_cdf_vs_ten_million_draws():
    m = sample_mixed_normal(make_rng(71), size=10_000_000)
    # heavy tails: extend the grid logarithmically
    far = np.logspace(np.log10(12.0), 10, 4000)[1:]
    grid = np.concatenate([-far[::-1], np.linspace(-12, 12, 60_001), far])
    assert _ks_upper_bound(m, mixed_normal_cdf, grid) < 0.001


def test_local_time_gaussian_cdf():
    x = np.array([-1.0, 0.0, 0.5])
    assert local_time_gaussian_cdf(0.0) == pytest.approx(0.5)
    # sqrt(L) H with L half-normal: sqrt(L) H and its mirror have the same law
    np.testing.assert_allclose(local_time_gaussian_cdf(x) + local_time_gaussian_cdf(-x), 1.0, atol=1e-13)
    rng = make_rng(72)
    s = np.sqrt(np.abs(rng.standard_normal(200_000))) * rng.standard_normal(200_000)
    assert ks_distance(s, local_time_gaussian_cdf) < 0.005
    assert ks_distance(s * 4.0**0.25, lambda v: local_time_gaussian_cdf(v, T=4.0)) < 0.005


def test_scaled_local_time_cdf():
    rng = make_rng(73)
    L = np.abs(rng.standard_normal(100_000))
    assert ks_distance(-1.3 * L, lambda v: scaled_local_time_cdf(v, -1.3)) < 0.01
    assert ks_distance(0.5 * L, lambda v: scaled_local_time_cdf(v, 0.5)) < 0.01
    with pytest.raises(ValidationError):
        scaled_local_time_cdf(0.1, 0.0)


def test_ks_examples():
    assert ks_distance([0.0], norm.cdf) == pytest.approx(0.5)
    a = np.random.default_rng(74).normal(size=500)
    assert ks_two_sample(a, a.copy()) == 0.0
    samples = np.random.default_rng(75).normal(size=10_000)
    d = ks_distance(samples, norm.cdf)
    assert 0 <= d < 0.02
    # sqrt(N) Delta should sit in the bulk of the Kolmogorov law
    assert math.sqrt(samples.size) * d < 1.36


def test_ks_invariant_under_monotone_transform():
    s = np.random.default_rng(76).normal(size=2000)
    a = ks_distance(s, mixed_normal_cdf)
    b = ks_distance(np.exp(s), lambda v: mixed_normal_cdf(np.log(v)))
    assert a == pytest.approx(b, abs=1e-12)


def test_ks_accepts_empirical_distribution():
    s = np.random.default_rng(77).normal(size=300)
    assert ks_distance(EmpiricalDistribution.from_samples(s), norm.cdf) == ks_distance(s, norm.cdf)


def test_empirical_distribution_steps():
    e = EmpiricalDistribution.from_samples([3.0, 1.0, 2.0, 2.0])
    np.testing.assert_array_equal(e.sorted_samples, [1, 2, 2, 3])
    assert e.n_samples == 4
    np.testing.assert_allclose(e.cdf([0.5, 1.0, 2.0, 2.5, 3.0]), [0, 0.25, 0.75, 0.75, 1.0])
    with pytest.raises(ValidationError):
        EmpiricalDistribution.from_samples([])


def test_rate_fit_exact_power_law():
    pts = [(n, 3 / math.sqrt(n)) for n in (100, 1000, 10_000)]
    fit = rate_fit(pts)
    assert abs(fit.eta - 0.5) < 1e-12 and abs(fit.C - 3) < 1e-12 and fit.r2 == pytest.approx(1.0)
    fit = rate_fit([(n, 0.2) for n in (10, 100, 1000)])
    assert abs(fit.eta) < 1e-12 and fit.C == pytest.approx(0.2)


def test_rate_fit_errors():
    with pytest.raises(ValidationError):
        rate_fit([(10, 0.1), (100, 0.03)])
    with pytest.raises(ValidationError):
        rate_fit([(10, 0.1), (10, 0.2), (10, 0.3)])
    with pytest.raises(ValidationError):
        rate_fit([(10, 0.1), (100, 0.0), (1000, 0.01)])


def test_skewness_and_histogram():
    x = np.random.default_rng(78).exponential(size=50_000)
    assert sample_skewness(x) == pytest.approx(2.0, rel=0.1)
    counts, edges = histogram(x, bins=10, range_=(0, 5))
    assert counts.sum() == np.sum(x <= 5) and edges.size == 11


@pytest.mark.slow
def test_mle_ks_rate_at_quarter():
    theta = 0.25
    pts = [(n, ks_distance(normalised_mle(mc_cell(theta, n), theta, n), mixed_normal_cdf)) for n in (100, 1000, 10_000)]
    assert 0.3 <= rate_fit(pts).eta <= 0.7
