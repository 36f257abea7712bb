"""Truncated formal power series without constant term.

Internally a series of order ``N`` is an array ``c`` of shape (..., N+1) with
``c[..., k]`` the coefficient of ``x^k`` and ``c[..., 0] == 0``.  Leading axes
batch independent series.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ._validation import check_int
from .exceptions import ValidationError


@dataclass(frozen=True)
class FormalSeries:
    """``sum_{k=1..N} coeffs[k-1] x^k``."""

    coeffs: np.ndarray = field()

    def __post_init__(self):
        c = np.array(self.coeffs, dtype=float)
        if c.ndim != 1 or c.size < 1:
            raise ValidationError("coeffs must be a non-empty 1-D sequence", ["coeffs"])
        object.__setattr__(self, "coeffs", c)

    @classmethod
    def from_full(cls, full) -> "FormalSeries":
        return cls(np.asarray(full, dtype=float)[1:])

    @property
    def order(self) -> int:
        return self.coeffs.size

    @property
    def full(self) -> np.ndarray:
        return np.concatenate(([0.0], self.coeffs))

    def __call__(self, x):
        return evaluate(self.full, x)


def truncated_mul(a, b, N: int) -> np.ndarray:
    """Product of two series (shape (..., N+1)) truncated at order ``N``."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    out = np.zeros(np.broadcast_shapes(a.shape[:-1], b.shape[:-1]) + (N + 1,))
    for q in range(N + 1):
        for k in range(q + 1):
            out[..., q] += a[..., k] * b[..., q - k]
    return out


def powers(c, N: int, m_max: int) -> list[np.ndarray]:
    """``[c^0, c^1, ..., c^m_max]`` truncated at order ``N``."""
    c = np.asarray(c, dtype=float)[..., : N + 1]
    one = np.zeros(c.shape)
    one[..., 0] = 1.0
    out = [one]
    for _ in range(m_max):
        out.append(truncated_mul(out[-1], c, N))
    return out


def compose_full(outer, inner, N: int) -> np.ndarray:
    """``outer(inner(x))`` truncated at order ``N`` (array form)."""
    outer = np.asarray(outer, dtype=float)
    inner = np.asarray(inner, dtype=float).copy()
    if np.any(inner[..., 0] != 0.0):
        raise ValidationError("inner series must have no constant term", ["inner"])
    inner = _pad(inner, N)
    pw = powers(inner, N, N)
    out = np.zeros(np.broadcast_shapes(outer.shape[:-1], inner.shape[:-1]) + (N + 1,))
    for k in range(1, min(N, outer.shape[-1] - 1) + 1):
        out += outer[..., k : k + 1] * pw[k]
    return out


def series_compose(outer: FormalSeries, inner: FormalSeries, N: int) -> FormalSeries:
    N = check_int(N, "N", minimum=1)
    return FormalSeries.from_full(compose_full(outer.full, inner.full, N))


def evaluate(c, x):
    """Evaluate ``sum_k c[..., k] x^k`` by Horner's rule."""
    c = np.asarray(c, dtype=float)
    x = np.asarray(x, dtype=float)
    acc = np.zeros(np.broadcast_shapes(c.shape[:-1], x.shape))
    for k in range(c.shape[-1] - 1, 0, -1):
        acc = (acc + c[..., k]) * x
    return acc


def _pad(c, N):
    if c.shape[-1] >= N + 1:
        return c[..., : N + 1]
    pad = np.zeros(c.shape[:-1] + (N + 1 - c.shape[-1],))
    return np.concatenate([c, pad], axis=-1)


def inverse_coeffs_full(d, N: int) -> np.ndarray:
    """Coefficients ``D_0..D_N`` solving ``D(x) = x + sum_{m>=2} d_m D(x)^m``.

    ``d[..., k]`` holds ``d_k``; entries ``k < 2`` are ignored.  Each order
    reuses the powers of the partially known series, so the cost is polynomial.
    """
    d = _pad(np.asarray(d, dtype=float), N)
    D = np.zeros(d.shape)
    D[..., 1] = 1.0
    for q in range(2, N + 1):
        pw = powers(D, q, q)
        D[..., q] = sum(d[..., m] * pw[m][..., q] for m in range(2, q + 1))
    return D


def expansion_coeffs(d) -> np.ndarray:
    """``D_1..D_N`` from ``d_2..d_N`` (``d[..., j]`` holds ``d_{j+2}``).

    ``D_1 = 1`` and ``D_q = sum_{m=2..q} d_m [x^q] D(x)^m``.
    """
    d = np.asarray(d, dtype=float)
    N = d.shape[-1] + 1
    full = np.concatenate([np.zeros(d.shape[:-1] + (2,)), d], axis=-1)
    return inverse_coeffs_full(full, N)[..., 1:]


def zero_theta_coeffs(d, n: float, M: int) -> np.ndarray:
    """Coefficients ``a_0..a_M`` of the expansion in ``h = n^(-1/4)`` at theta = 0.

    ``d[..., k]`` holds ``d_{k,n}(0)`` for ``k = 0..M``.  Starting from
    ``a_1 = n^(1/4) d_0``, order ``k`` collects ``n^(1/4) d_m [h^(k-1)] delta^m``
    for even ``m`` and ``d_m [h^k] delta^m`` for odd ``m``.  Even orders vanish.
    """
    d = _pad(np.asarray(d, dtype=float), M)
    n4 = float(n) ** 0.25
    a = np.zeros(d.shape)
    if M >= 1:
        a[..., 1] = n4 * d[..., 0]
    for k in range(2, M + 1):
        pw = powers(a, k, k)
        acc = np.zeros(d.shape[:-1])
        for m in range(2, k + 1):
            if m % 2 == 0:
                acc = acc + n4 * d[..., m] * pw[m][..., k - 1]
            else:
                acc = acc + d[..., m] * pw[m][..., k]
        a[..., k] = acc
    return a
