"""Rescaled score derivatives and the statistics built from them.

``S_m(n, theta) = n^(-1/2) sum_i d^m/dtheta^m k_theta(X_i sqrt(n), X_{i+1} sqrt(n))``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ._validation import check_int, check_positive, check_theta
from .density import kernel_from_weights, sign_and_weight
from .exceptions import DegenerateStatisticError, DomainError
from .path import SbmPath

DEGENERATE_S1 = 1e-12


@dataclass(frozen=True)
class ScoreStats:
    n: int
    theta: float
    s: np.ndarray = field(repr=False)
    T: float = 1.0

    @property
    def M(self) -> int:
        return self.s.size - 1

    @property
    def degenerate(self) -> bool:
        """Quality flag: ``|S_1|`` is too small for the ratio statistics."""
        return bool(self.M >= 1 and abs(self.s[1]) < DEGENERATE_S1)


def transition_kernels(values, n: int, theta):
    """Score kernel of every transition; ``values`` has shape (..., N+1).

    ``theta`` may be a scalar or an array broadcasting against ``values[..., 0]``.
    """
    values = np.asarray(values, dtype=float)
    s, w = sign_and_weight(values[..., :-1], values[..., 1:], 1.0 / n)
    th = np.asarray(theta, dtype=float)[..., None]
    return kernel_from_weights(th, s, w)


def score_stats(path: SbmPath, theta, M: int) -> ScoreStats:
    """Compute ``S_0 .. S_M`` for one path, with compensated summation."""
    if not isinstance(path, SbmPath):
        raise DomainError("score_stats expects an SbmPath", ["path"])
    theta = check_theta(theta, interior=True)
    M = check_int(M, "M", minimum=0)
    k = transition_kernels(path.values, path.n, theta)
    root_n = math.sqrt(path.n)
    s = np.empty(M + 1)
    power = k.copy()
    for m in range(M + 1):
        s[m] = math.factorial(m) * (-1.0) ** m * math.fsum(power) / root_n
        power *= k
    return ScoreStats(n=path.n, theta=theta, s=s, T=path.T)


def score_stats_batch(X, n: int, theta, M: int) -> np.ndarray:
    """``S_0 .. S_M`` for each row of ``X``; returns shape (R, M+1).

    ``theta`` is a scalar or one value per row.
    """
    M = check_int(M, "M", minimum=0)
    X = np.atleast_2d(np.asarray(X, dtype=float))
    k = transition_kernels(X, n, theta)
    out = np.empty((X.shape[0], M + 1))
    power = k.copy()
    for m in range(M + 1):
        out[:, m] = math.factorial(m) * (-1.0) ** m * power.sum(axis=-1)
        power *= k
    return out / math.sqrt(n)


def d_from_s(s) -> np.ndarray:
    """``d_k = -S_k / (k! S_1)`` along the last axis."""
    s = np.asarray(s, dtype=float)
    if np.any(s[..., 1] == 0.0):
        raise DegenerateStatisticError("S_1 vanishes")
    fact = np.array([math.factorial(k) for k in range(s.shape[-1])], dtype=float)
    return -s / (fact * s[..., 1:2])


def d_stat(stats: ScoreStats, k: int) -> float:
    """``d_{k,n}(theta) = -S_k / (k! S_1)``; exactly -1 for ``k = 1``."""
    k = check_int(k, "k", minimum=0)
    if k > stats.M:
        raise DomainError(f"statistics only go up to order {stats.M}", ["k"])
    if stats.s[1] == 0.0:
        raise DegenerateStatisticError("S_1 vanishes")
    if k == 1:
        return -1.0
    return -stats.s[k] / (math.factorial(k) * stats.s[1])


def pivot_stat(stats: ScoreStats, s_theta: float, T: float | None = None) -> float:
    """``P_n = n^(1/4) T^(1/4) d_{0,n}(theta) / s(theta)``."""
    s_theta = check_positive(s_theta, "s_theta")
    T = stats.T if T is None else check_positive(T, "T")
    return (stats.n * T) ** 0.25 * d_stat(stats, 0) / s_theta


def chi2_stat(stats: ScoreStats) -> float:
    """Score test statistic ``(score)^2 / (observed information)``.

    In terms of the rescaled statistics this is ``-sqrt(n) S_0^2 / S_1``,
    which is nonnegative because ``S_1 < 0``.
    """
    if stats.M < 1 or stats.s[1] == 0.0:
        raise DegenerateStatisticError("S_1 vanishes or is missing")
    return -math.sqrt(stats.n) * stats.s[0] ** 2 / stats.s[1]
