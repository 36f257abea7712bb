"""Transition density, invariant density, score kernel and log-likelihood.

All quadrant formulas reduce to one expression: with ``s = sgn(y)``
(``sgn(0) = +1``) and ``w = exp(-2 (x y)^+ / t)``,

    p(t, x, y) = phi_t(x - y) * (1 + s * theta * w),
    d/dtheta log p = s * w / (1 + s * theta * w).

Every function broadcasts over numpy arrays.
"""

from __future__ import annotations

import math
import warnings

import numpy as np

from ._validation import check_int, check_positive, check_theta
from .exceptions import DomainError, SingularityError
from .path import SbmPath

_LOG_SQRT_2PI = 0.5 * math.log(2.0 * math.pi)


class ZeroDensityWarning(RuntimeWarning):
    """A transition has zero density, so the log-likelihood is -inf."""


def sign_and_weight(x, y, t=1.0):
    """Return ``(sgn(y), exp(-2 (x y)^+ / t))`` with ``sgn(0) = +1``."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    s = np.where(y >= 0.0, 1.0, -1.0)
    w = np.exp(-2.0 * np.maximum(x * y, 0.0) / t)
    return s, w


def transition_density(theta, t, x, y):
    """Transition density ``p_theta(t, x, y)``."""
    theta = check_theta(theta)
    t = check_positive(t, "t")
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    s, w = sign_and_weight(x, y, t)
    gauss = np.exp(-((x - y) ** 2) / (2.0 * t)) / math.sqrt(2.0 * math.pi * t)
    out = gauss * np.maximum(1.0 + s * theta * w, 0.0)
    return out if out.ndim else float(out)


def log_transition_density(theta, t, x, y):
    theta = check_theta(theta)
    t = check_positive(t, "t")
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    s, w = sign_and_weight(x, y, t)
    with np.errstate(divide="ignore"):
        out = (
            -((x - y) ** 2) / (2.0 * t)
            - _LOG_SQRT_2PI
            - 0.5 * math.log(t)
            + np.log1p(np.maximum(s * theta * w, -1.0))
        )
    return out if out.ndim else float(out)


def invariant_density(theta, x):
    """``1 + theta`` on ``x >= 0`` and ``1 - theta`` on ``x < 0``."""
    theta = check_theta(theta)
    x = np.asarray(x, dtype=float)
    out = np.where(x >= 0.0, 1.0 + theta, 1.0 - theta)
    return out if out.ndim else float(out)


def kernel_from_weights(theta: float, s, w):
    """Score kernel from precomputed signs and weights (no validation)."""
    den = 1.0 + s * theta * w
    if np.any(den == 0.0):
        raise SingularityError(f"score kernel is singular at theta={theta}")
    return s * w / den


def score_kernel(theta, x, y):
    """``k_theta(x, y) = sgn(y) / (sgn(y) theta + exp(2 (x y)^+))``."""
    theta = check_theta(theta)
    s, w = sign_and_weight(x, y)
    out = kernel_from_weights(theta, s, w)
    return out if np.ndim(out) else float(out)


def score_kernel_deriv(theta, x, y, m: int):
    """``m``-th theta-derivative of the score kernel, ``m! (-1)^m k^(m+1)``."""
    m = check_int(m, "m", minimum=0)
    k = np.asarray(score_kernel(theta, x, y))
    out = math.factorial(m) * (-1.0) ** m * k ** (m + 1)
    return out if out.ndim else float(out)


def log_likelihood(theta, path: SbmPath) -> float:
    """Sum of log transition densities along the observed path.

    Returns ``-inf`` with a :class:`ZeroDensityWarning` when some transition
    has zero density, which can only happen at ``|theta| = 1``.
    """
    theta = check_theta(theta)
    if not isinstance(path, SbmPath):
        raise DomainError("log_likelihood expects an SbmPath", ["path"])
    v = path.values
    terms = log_transition_density(theta, path.dt, v[:-1], v[1:])
    if np.any(np.isneginf(terms)):
        warnings.warn("zero-density transition", ZeroDensityWarning, stacklevel=2)
        return -math.inf
    return math.fsum(terms)
