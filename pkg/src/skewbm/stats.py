"""Empirical distributions, reference CDFs of the limit laws, KS distances, rate fits."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import stats as sps
from scipy.special import ndtr

from ._validation import check_positive
from .exceptions import ValidationError
from .quadrature import gl_panels

# Geometric panels resolve the step of Phi(x u) near u = 0 for large |x|.
_U_EDGES = np.concatenate([[0.0], 2.0 ** np.arange(-40, 4, dtype=float)])
_U_NODES, _U_WEIGHTS = gl_panels(_U_EDGES, 24)
# Half-normal law of L written as L = u^2 with density 4 u phi(u^2).
_HALF_NORMAL_W = _U_WEIGHTS * 4.0 * _U_NODES * np.exp(-0.5 * _U_NODES**4) / math.sqrt(2.0 * math.pi)


@dataclass(frozen=True)
class EmpiricalDistribution:
    sorted_samples: np.ndarray

    @classmethod
    def from_samples(cls, samples) -> "EmpiricalDistribution":
        s = np.sort(np.asarray(samples, dtype=float).ravel())
        if s.size == 0:
            raise ValidationError("need at least one sample", ["samples"])
        return cls(s)

    @property
    def n_samples(self) -> int:
        return self.sorted_samples.size

    def cdf(self, x):
        return np.searchsorted(self.sorted_samples, x, side="right") / self.n_samples


@dataclass(frozen=True)
class RateFit:
    eta: float
    C: float
    r2: float


_CHUNK = 8192


def _apply(x, fn):
    x = np.asarray(x, dtype=float)
    flat = x.ravel()
    # chunked so the (points x nodes) work array stays small
    out = np.concatenate([fn(flat[i : i + _CHUNK]) for i in range(0, flat.size, _CHUNK)] or [np.empty(0)])
    out = out.reshape(x.shape)
    return out if out.ndim else float(out)


def mixed_normal_cdf(x):
    """``F(x) = E[Phi(x sqrt(L))]`` with ``L = |N(0, 1)|``."""
    return _apply(x, lambda v: ndtr(np.outer(v, _U_NODES)) @ _HALF_NORMAL_W)


def local_time_gaussian_cdf(x, T: float = 1.0):
    """CDF of ``sqrt(L_T) H`` with ``L_T = sqrt(T) |N(0,1)|`` and ``H`` standard normal."""
    T = check_positive(T, "T")
    scale = T**0.25
    with np.errstate(divide="ignore"):
        return _apply(x, lambda v: ndtr(np.outer(v, 1.0 / (scale * _U_NODES))) @ _HALF_NORMAL_W)


def scaled_local_time_cdf(x, xi: float, T: float = 1.0):
    """CDF of ``xi L_T`` with ``L_T = sqrt(T) |N(0,1)|``; the sign of ``xi`` is honoured."""
    T = check_positive(T, "T")
    if xi == 0.0:
        raise ValidationError("xi must be nonzero", ["xi"])
    sc = abs(xi) * math.sqrt(T)

    def fn(v):
        if xi > 0:
            return np.where(v > 0, 2.0 * ndtr(v / sc) - 1.0, 0.0)
        return np.where(v < 0, 2.0 * ndtr(v / sc), 1.0)

    return _apply(x, fn)


def _samples(emp):
    if isinstance(emp, EmpiricalDistribution):
        return emp.sorted_samples
    return np.asarray(emp, dtype=float).ravel()


def ks_distance(emp, cdf) -> float:
    """``sup |F_emp - F_ref|`` over both one-sided step values at the samples."""
    return float(sps.kstest(_samples(emp), cdf).statistic)


def ks_two_sample(a, b) -> float:
    return float(sps.ks_2samp(_samples(a), _samples(b)).statistic)


def rate_fit(points) -> RateFit:
    """Least-squares fit of ``log delta = log C - eta log n``."""
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 2 or pts.shape[0] < 3:
        raise ValidationError("rate_fit needs at least three (n, delta) pairs", ["points"])
    if np.any(pts <= 0):
        raise ValidationError("rate_fit needs positive n and delta", ["points"])
    ln, ld = np.log(pts[:, 0]), np.log(pts[:, 1])
    if np.ptp(ln) == 0.0:
        raise ValidationError("rate_fit needs distinct n values", ["points"])
    res = sps.linregress(ln, ld)
    r2 = res.rvalue**2 if np.ptp(ld) > 0 else 1.0
    return RateFit(eta=float(-res.slope), C=float(math.exp(res.intercept)), r2=float(r2))


def sample_skewness(x) -> float:
    return float(sps.skew(np.asarray(x, dtype=float).ravel()))


def histogram(x, bins: int = 50, range_=None):
    counts, edges = np.histogram(np.asarray(x, dtype=float).ravel(), bins=bins, range=range_)
    return counts, edges
