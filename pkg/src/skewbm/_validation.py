"""Input validation helpers used by the public functions and estimators."""

from __future__ import annotations

import math
from numbers import Integral, Real

import numpy as np

from .exceptions import DomainError, ValidationError


def check_theta(theta, *, interior: bool = False, name: str = "theta") -> float:
    """Return ``theta`` as a float after checking ``|theta| <= 1``.

    With ``interior=True`` the open interval ``|theta| < 1`` is required.
    """
    if isinstance(theta, bool) or not isinstance(theta, Real):
        raise ValidationError(f"{name} must be a real number, got {theta!r}", [name])
    theta = float(theta)
    if not math.isfinite(theta):
        raise DomainError(f"{name} must be finite", [name])
    if interior and abs(theta) >= 1.0:
        raise DomainError(f"{name} must satisfy |{name}| < 1, got {theta}", [name])
    if abs(theta) > 1.0:
        raise DomainError(f"{name} must satisfy |{name}| <= 1, got {theta}", [name])
    return theta


def check_positive(value, name: str) -> float:
    if isinstance(value, bool) or not isinstance(value, Real):
        raise ValidationError(f"{name} must be a real number", [name])
    value = float(value)
    if not (value > 0.0 and math.isfinite(value)):
        raise DomainError(f"{name} must be positive and finite, got {value}", [name])
    return value


def check_int(value, name: str, minimum: int | None = None) -> int:
    if isinstance(value, bool) or not isinstance(value, Integral):
        raise ValidationError(f"{name} must be an integer, got {value!r}", [name])
    value = int(value)
    if minimum is not None and value < minimum:
        raise DomainError(f"{name} must be >= {minimum}, got {value}", [name])
    return value


def n_observations(n: int, T: float) -> int:
    """Number of observations ``floor(n T) + 1`` on the grid ``i / n``.

    A relative slack absorbs binary rounding such as ``0.29 * 100``.
    """
    return int(math.floor(n * T * (1.0 + 1e-12))) + 1


def check_path_array(X, *, ensure_2d: bool = False) -> np.ndarray:
    """Validate observations given as one path (1-D) or a stack of paths (2-D).

    Paths must be finite, start at 0 and contain at least two points.
    """
    X = np.asarray(X, dtype=float)
    if X.ndim == 1 and ensure_2d:
        X = X[np.newaxis, :]
    if X.ndim not in (1, 2):
        raise ValidationError(f"paths must be 1-D or 2-D, got shape {X.shape}", ["X"])
    if X.shape[-1] < 2:
        raise ValidationError("a path needs at least two observations", ["X"])
    if not np.all(np.isfinite(X)):
        raise ValidationError("paths contain non-finite values", ["X"])
    if np.any(X[..., 0] != 0.0):
        raise ValidationError("paths must start at 0", ["X"])
    return X
