import math
import warnings

import numpy as np
import pytest
from scipy import integrate
from scipy.stats import norm

from skewbm import SbmPath, simulate_path
from skewbm.density import (
    ZeroDensityWarning,
    invariant_density,
    log_likelihood,
    log_transition_density,
    score_kernel,
    score_kernel_deriv,
    transition_density,
)
from skewbm.exceptions import DomainError, SingularityError


def test_brownian_case():
    assert transition_density(0.0, 1.0, 0.3, -0.7) == pytest.approx(norm.pdf(-1.0), rel=1e-14)
    assert transition_density(0.0, 1.0, 0.3, -0.7) == pytest.approx(0.24197, abs=1e-5)


@pytest.mark.parametrize("theta", [-0.8, 0.0, 0.5, 1.0])
def test_start_at_zero(theta):
    for y in (-1.3, 1.0, 2.2):
        assert transition_density(theta, 1.0, 0.0, y) == pytest.approx((1 + theta * np.sign(y)) * norm.pdf(y))


def test_reflected_branch_vanishes():
    assert transition_density(1.0, 1.0, 2.0, -1.0) == 0.0
    assert transition_density(-1.0, 1.0, -2.0, 1.0) == 0.0


def test_nonpositive_time_rejected():
    with pytest.raises(DomainError):
        transition_density(0.1, 0.0, 0.0, 1.0)
    with pytest.raises(DomainError):
        transition_density(0.1, -1.0, 0.0, 1.0)


def test_theta_out_of_range_rejected():
    with pytest.raises(DomainError):
        transition_density(1.5, 1.0, 0.0, 1.0)


def test_invariant_density():
    assert invariant_density(0.5, 1.0) == 1.5
    assert invariant_density(0.0, -3.0) == 1.0
    assert invariant_density(-0.3, -2.0) == pytest.approx(1.3)
    assert invariant_density(0.4, 0.0) == pytest.approx(1.4)


@pytest.mark.parametrize("x", [-2.0, -0.5, 0.0, 0.5, 2.0])
@pytest.mark.parametrize("theta", [-0.9, 0.0, 0.6])
def test_normalisation(x, theta):
    lo, hi = x - 10.0, x + 10.0
    pts = [0.0] if lo < 0 < hi else None
    val = integrate.quad(lambda y: transition_density(theta, 1.0, x, y), lo, hi, points=pts, epsabs=1e-13)[0]
    assert abs(val - 1.0) < 1e-8


def test_nonnegative_on_random_grid():
    rng = np.random.default_rng(1)
    x, y = rng.normal(scale=2, size=(2, 5000))
    for t in (0.01, 0.5, 3.0):
        for theta in (-1.0, -0.3, 0.7, 1.0):
            assert np.all(transition_density(theta, t, x, y) >= 0)


def test_density_symmetry():
    rng = np.random.default_rng(2)
    x, y = rng.normal(size=(2, 1000))
    for theta in (-0.7, 0.2, 0.9):
        np.testing.assert_allclose(
            transition_density(theta, 1.0, -x, -y), transition_density(-theta, 1.0, x, y), rtol=1e-14
        )


def test_kernel_examples():
    for theta in (-0.5, 0.0, 0.4):
        assert score_kernel(theta, 1.0, -1.0) == pytest.approx(1.0 / (theta - 1.0))
    assert score_kernel(0.0, 0.0, 1.0) == 1.0
    assert score_kernel(0.5, 1.0, 2.0) == pytest.approx(1.0 / (0.5 + math.exp(4.0)))


def test_kernel_singular_branch():
    with pytest.raises(SingularityError):
        score_kernel(1.0, 1.0, -1.0)
    with pytest.raises(SingularityError):
        score_kernel(-1.0, -1.0, 1.0)
    # nonsingular branches are fine at the boundary
    assert score_kernel(1.0, 1.0, 1.0) == pytest.approx(1.0 / (1.0 + math.exp(2.0)))


def test_kernel_antisymmetry():
    rng = np.random.default_rng(3)
    x, y = rng.normal(size=(2, 1000))
    for theta in (-0.6, 0.0, 0.8):
        np.testing.assert_allclose(score_kernel(theta, -x, -y), -score_kernel(-theta, x, y), rtol=1e-14)


@pytest.mark.parametrize("n", [4, 100])
def test_scaling_identity(n):
    rng = np.random.default_rng(n)
    x, y = rng.normal(scale=1 / math.sqrt(n), size=(2, 50))
    h = 1e-6
    for theta in (-0.4, 0.3):
        fd = (log_transition_density(theta + h, 1 / n, x, y) - log_transition_density(theta - h, 1 / n, x, y)) / (2 * h)
        np.testing.assert_allclose(score_kernel(theta, x * math.sqrt(n), y * math.sqrt(n)), fd, atol=1e-6)


@pytest.mark.parametrize("x", [-1.5, -0.2, 0.0, 0.7])
@pytest.mark.parametrize("theta", [-0.5, 0.3])
def test_zero_conditional_mean(x, theta):
    pts = [0.0]
    val = integrate.quad(
        lambda y: score_kernel(theta, x, y) * transition_density(theta, 1.0, x, y), x - 12, x + 12, points=pts,
        epsabs=1e-13,
    )[0]
    assert abs(val) < 1e-8


def test_kernel_derivative_examples():
    assert score_kernel_deriv(0.2, 0.4, -0.3, 0) == score_kernel(0.2, 0.4, -0.3)
    assert score_kernel_deriv(0.0, 0.0, 1.0, 2) == 2.0
    h = 1e-5
    fd = (score_kernel(0.3 + h, 0.5, 0.5) - score_kernel(0.3 - h, 0.5, 0.5)) / (2 * h)
    assert score_kernel_deriv(0.3, 0.5, 0.5, 1) == pytest.approx(fd, abs=1e-6)


@pytest.mark.parametrize("m", [1, 2, 3])
def test_kernel_derivative_finite_differences(m):
    x, y, theta, h = np.array([0.3, -0.5, 0.1]), np.array([0.2, 0.4, -0.9]), 0.25, 1e-3 if m < 3 else 3e-4
    # m-fold central difference of the kernel
    coeffs = {1: [(-1, -0.5), (1, 0.5)], 2: [(-1, 1.0), (0, -2.0), (1, 1.0)],
              3: [(-2, -0.5), (-1, 1.0), (1, -1.0), (2, 0.5)]}[m]
    fd = sum(c * score_kernel(theta + j * h, x, y) for j, c in coeffs) / h**m
    np.testing.assert_allclose(score_kernel_deriv(theta, x, y, m), fd, atol=1e-4)


def test_log_likelihood_brownian():
    path = simulate_path(0.0, 50, 1.0, seed=4)
    inc = np.diff(path.values)
    want = math.fsum(norm.logpdf(inc, scale=math.sqrt(path.dt)))
    assert log_likelihood(0.0, path) == pytest.approx(want, rel=1e-13)


def test_log_likelihood_single_transition():
    path = SbmPath(n=1, T=1.0, values=np.array([0.0, 1.0]))
    grid = np.linspace(-0.9, 1, 20)
    ll = [log_likelihood(t, path) for t in grid]
    assert ll[-1] == pytest.approx(math.log(2 * norm.pdf(1.0)))
    assert np.all(np.diff(ll) > 0)


def test_log_likelihood_resummation():
    path = simulate_path(0.5, 1000, 1.0, seed=5)
    v = path.values
    want = math.fsum(math.log(transition_density(0.5, path.dt, a, b)) for a, b in zip(v[:-1], v[1:]))
    assert abs(log_likelihood(0.5, path) - want) < 1e-10


def test_log_likelihood_zero_density_sentinel():
    path = SbmPath(n=1, T=2.0, values=np.array([0.0, 1.0, -1.0]))
    with warnings.catch_warnings(record=True) as rec:
        warnings.simplefilter("always")
        assert log_likelihood(1.0, path) == -math.inf
    assert any(issubclass(w.category, ZeroDensityWarning) for w in rec)
    assert math.isfinite(log_likelihood(0.99, path))


def test_log_density_large_increment_no_underflow():
    assert np.isfinite(log_transition_density(0.3, 1e-4, 0.0, 1.0))
    assert log_transition_density(0.3, 1e-4, 0.0, 1.0) == pytest.approx(math.log(1.3) - 0.5e4 - 0.5 * math.log(2 * math.pi * 1e-4))
