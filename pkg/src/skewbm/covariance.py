"""Limiting covariance ``Psi_{2i,2j}`` of the even score statistics at theta = 0.

``Psi_{2i,2j} = (2i)! (2j)! (Psi^I + Psi^II + Psi^III)`` with kernels
``K_m(x) = E[exp(-2m (x B_1)^+) sgn(B_1) | B_0 = x]`` and ``K^_m`` (same with
``sgn(x)``), both written through erfcx.

``Psi^II`` is the lag-one term ``A(1,m,n) + A(1,n,m)`` with ``A(1,m,n) = int K^_m K_n``.
``Psi^III`` is ``sum_{l>=2} A(l,m,n) + A(l,n,m)`` with
``A(l,m,n) = int int K^_m(y) K_n(z) g_{l-1}(z - y)``, ``g_s`` the N(0, s) density.
For large lags ``A`` is an exact convergent series in ``1/s`` whose
coefficients are kernel moments.  The tail of the lag sum is evaluated from
that series with Hurwitz zeta functions once the direct terms agree with it.
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy import special

from ._validation import check_int, check_positive
from .coefficients import SQRT_2PI, alpha, chi_pp_zero
from .exceptions import DomainError
from .quadrature import HALF_LINE_EDGES, gl_panels, integrate_1d

SQRT2 = math.sqrt(2.0)
ERFC2_CONSTANT = 2.0 * (SQRT2 - 1.0) / math.sqrt(math.pi)
MOMENT_EDGES = np.concatenate([HALF_LINE_EDGES, [14.0, 17.0, 20.0, 24.0, 30.0]])
_ORDER = 32
ASYMPTOTIC_MIN_LAG = 12
MAX_SERIES_TERMS = 40


class TruncationWarning(RuntimeWarning):
    """The lag sum hit its cap before meeting the tolerance."""


def erfcx(x):
    """Scaled complementary error function ``exp(x^2) erfc(x)`` for ``x >= 0``."""
    x = np.asarray(x, dtype=float)
    if np.any(x < 0.0) or np.any(np.isnan(x)):
        raise DomainError("erfcx is defined here for x >= 0 only", ["x"])
    out = special.erfcx(x)
    return out if out.ndim else float(out)


def b(m: int) -> float:
    return (2 * m - 1) / SQRT2


def K(m: int, x):
    """``K_m(x) = sgn(x) e^{-x^2/2} (erfcx(b_m |x|) - erfcx(|x|/sqrt 2)) / 2``."""
    x = np.asarray(x, dtype=float)
    ax = np.abs(x)
    out = 0.5 * np.sign(x) * np.exp(-0.5 * x * x) * (special.erfcx(b(m) * ax) - special.erfcx(ax / SQRT2))
    return out if out.ndim else float(out)


def K_hat(m: int, x):
    """``K^_m(x)``: as :func:`K` with a plus sign between the erfcx terms."""
    x = np.asarray(x, dtype=float)
    ax = np.abs(x)
    out = 0.5 * np.sign(x) * np.exp(-0.5 * x * x) * (special.erfcx(b(m) * ax) + special.erfcx(ax / SQRT2))
    return out if out.ndim else float(out)


def erfc_squared_integral() -> tuple[float, float]:
    """``int_0^inf erfc(x / sqrt 2)^2 dx`` by quadrature, with error estimate."""
    return integrate_1d(lambda x: special.erfc(x / SQRT2) ** 2, HALF_LINE_EDGES, _ORDER)


def psi_I(i: int, j: int) -> float:
    """``chi_{2(i+j)+2}(0) = (2/sqrt(2 pi)) (1 + sqrt(2 pi) chi^{++}_{2(i+j+1)}(0))``."""
    i = check_int(i, "i", minimum=0)
    j = check_int(j, "j", minimum=0)
    return 2.0 / SQRT_2PI * (1.0 + SQRT_2PI * chi_pp_zero(2 * (i + j + 1)))


def A_one(m: int, n: int) -> float:
    """``int_R K^_m(x) K_n(x) dx`` (the lag-one term)."""
    return 2.0 * integrate_1d(lambda x: K_hat(m, x) * K(n, x), HALF_LINE_EDGES, _ORDER)[0]


def psi_II(i: int, j: int) -> float:
    """``A(1,m,n) + A(1,n,m)`` with ``m = 2i+1``, ``n = 2j+1``.

    The symmetric sum simplifies to
    ``int_0^inf e^{-x^2} erfcx(b_m x) erfcx(b_n x) dx - 2 (sqrt 2 - 1) / sqrt(pi)``.
    """
    i = check_int(i, "i", minimum=0)
    j = check_int(j, "j", minimum=0)
    bm, bn = b(2 * i + 1), b(2 * j + 1)
    val, _ = integrate_1d(
        lambda x: np.exp(-x * x) * special.erfcx(bm * x) * special.erfcx(bn * x), HALF_LINE_EDGES, _ORDER
    )
    return val - ERFC2_CONSTANT


def psi_II_mc(i: int, j: int, n_draws: int, seed) -> tuple[float, float]:
    """Monte-Carlo form of :func:`psi_II` over a half-normal variable."""
    from .simulate import make_rng

    g = np.abs(make_rng(seed).standard_normal(n_draws)) / SQRT2
    h = special.erfcx(b(2 * i + 1) * g) * special.erfcx(b(2 * j + 1) * g) * math.sqrt(math.pi) / 2.0
    return float(h.mean()) - ERFC2_CONSTANT, float(h.std(ddof=1) / math.sqrt(n_draws))


@lru_cache(maxsize=None)
def _kernel_nodes(m: int, hat: bool):
    y, w = gl_panels(HALF_LINE_EDGES, _ORDER)
    k = K_hat(m, y) if hat else K(m, y)
    return y, w * k


def A_ell(ell: int, m: int, n: int) -> float:
    """``(2 pi (l-1))^{-1/2} int int K^_m(y) K_n(z) exp(-(z-y)^2 / (2 (l-1))) dy dz``.

    Both kernels are odd, so the plane folds onto the positive quadrant with
    the weight ``g(z-y) - g(z+y) = 2 e^{-(y^2+z^2)/2s} sinh(yz/s) / sqrt(2 pi s)``.
    """
    ell = check_int(ell, "ell", minimum=2)
    if n == 1:
        return 0.0
    s = float(ell - 1)
    y, wy = _kernel_nodes(m, True)
    z, wz = _kernel_nodes(n, False)
    Y, Z = y[:, None], z[None, :]
    kern = np.exp(-(Y * Y + Z * Z) / (2.0 * s)) * np.sinh(Y * Z / s) * (4.0 / math.sqrt(2.0 * math.pi * s))
    return float(wy @ kern @ wz)


@lru_cache(maxsize=None)
def kernel_moments(m: int, hat: bool, a_max: int = 2 * MAX_SERIES_TERMS) -> np.ndarray:
    """``int_R x^a K_m(x) dx`` (or ``K^_m``) for ``a = 0..a_max``; even moments vanish."""
    x, w = gl_panels(MOMENT_EDGES, _ORDER)
    k = K_hat(m, x) if hat else K(m, x)
    out = np.zeros(a_max + 1)
    for a in range(1, a_max + 1, 2):
        out[a] = 2.0 * float(w @ (x**a * k))
    return out


@lru_cache(maxsize=None)
def _series_coeffs(m: int, n: int) -> np.ndarray:
    """``c_k`` with ``A(l,m,n) = sum_k c_k s^{-(k+1/2)}``, ``s = l - 1``."""
    Mh = kernel_moments(m, True)
    Mk = kernel_moments(n, False)
    c = np.zeros(MAX_SERIES_TERMS + 1)
    for k in range(MAX_SERIES_TERMS + 1):
        mu = math.fsum(
            math.comb(2 * k, a) * Mk[a] * (-1.0) ** (2 * k - a) * Mh[2 * k - a] for a in range(1, 2 * k, 2)
        )
        c[k] = (-1.0) ** k / (2.0**k * math.factorial(k)) * mu / math.sqrt(2.0 * math.pi)
    return c


def A_ell_asymptotic(ell: int, m: int, n: int) -> float:
    """Large-lag series for :func:`A_ell` (exact for ``l - 1 > 2``)."""
    s = float(ell - 1)
    c = _series_coeffs(m, n)
    k = np.arange(c.size)
    return float(np.sum(c * s ** -(k + 0.5)))


def A_tail(first_ell: int, m: int, n: int) -> float:
    """``sum_{l >= first_ell} A(l, m, n)`` from the series and Hurwitz zeta."""
    c = _series_coeffs(m, n)
    k = np.arange(1, c.size)  # c_0 = 0: kernels have no mass
    return float(np.sum(c[1:] * special.zeta(k + 0.5, float(first_ell - 1))))


@dataclass(frozen=True)
class PsiIIIResult:
    value: float
    L_used: int
    tail: float
    tail_bound: float
    converged: bool


def psi_III(i: int, j: int, tol: float = 1e-6, l_max: int = 10_000, tail: bool = True) -> PsiIIIResult:
    """Lag sum ``sum_{l>=2} A(l,m,n) + A(l,n,m)`` with ``m = 2i+1``, ``n = 2j+1``.

    With ``tail=True`` direct terms are summed until they agree with the
    large-lag series within ``tol * |partial sum|`` for three consecutive lags
    and the remainder is added in closed form.  With ``tail=False`` plain
    partial sums run until the term is below ``tol * |partial sum|`` three
    times in a row, or until ``l_max``.
    """
    i = check_int(i, "i", minimum=0)
    j = check_int(j, "j", minimum=0)
    tol = check_positive(tol, "tol")
    l_max = check_int(l_max, "l_max", minimum=2)
    m, n = 2 * i + 1, 2 * j + 1
    partial = 0.0
    streak = 0
    mismatch = 0.0
    for ell in range(2, l_max + 1):
        term = A_ell(ell, m, n) + A_ell(ell, n, m)
        partial += term
        if tail:
            if ell < ASYMPTOTIC_MIN_LAG:
                continue
            pred = A_ell_asymptotic(ell, m, n) + A_ell_asymptotic(ell, n, m)
            mismatch = max(mismatch, abs(term - pred)) if streak else abs(term - pred)
            streak = streak + 1 if abs(term - pred) <= tol * abs(partial) else 0
            if streak >= 3:
                rest = A_tail(ell + 1, m, n) + A_tail(ell + 1, n, m)
                return PsiIIIResult(partial + rest, ell, rest, mismatch * ell, True)
        else:
            streak = streak + 1 if abs(term) <= tol * abs(partial) else 0
            if streak >= 3:
                return PsiIIIResult(partial, ell, 0.0, abs(term) * ell, True)
    warnings.warn(f"lag sum for ({i},{j}) stopped at l_max={l_max}", TruncationWarning, stacklevel=2)
    last = A_ell(l_max, m, n) + A_ell(l_max, n, m)
    return PsiIIIResult(partial, l_max, 0.0, abs(last) * l_max, False)


@dataclass
class PsiMatrix:
    m_max: int
    psi: np.ndarray
    parts: dict = field(default_factory=dict)
    truncation_L: int = 0
    tail_bound: float = 0.0
    converged: bool = True

    def to_dict(self) -> dict:
        return {
            "m_max": self.m_max,
            "indices": [2 * i for i in range(self.m_max + 1)],
            "psi": self.psi.tolist(),
            "parts": [
                {"i": 2 * i, "j": 2 * j, "psi_I": p[0], "psi_II": p[1], "psi_III": p[2]}
                for (i, j), p in sorted(self.parts.items())
            ],
            "truncation_L": self.truncation_L,
            "tail_bound": self.tail_bound,
            "converged": self.converged,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


def psi_matrix(m_max: int, tol: float = 1e-6, l_max: int = 10_000, tail: bool = True) -> PsiMatrix:
    """Assemble ``Psi_{2i,2j}`` for ``0 <= i, j <= m_max``."""
    m_max = check_int(m_max, "m_max", minimum=0)
    size = m_max + 1
    psi = np.zeros((size, size))
    out = PsiMatrix(m_max=m_max, psi=psi)
    for i in range(size):
        for j in range(i, size):
            I = psi_I(i, j)
            if i == 0 and j == 0:
                II, III = 0.0, PsiIIIResult(0.0, 0, 0.0, 0.0, True)
            else:
                II, III = psi_II(i, j), psi_III(i, j, tol, l_max, tail)
            val = math.factorial(2 * i) * math.factorial(2 * j) * (I + II + III.value)
            psi[i, j] = psi[j, i] = val
            out.parts[(i, j)] = (I, II, III.value)
            out.truncation_L = max(out.truncation_L, III.L_used)
            out.tail_bound = max(out.tail_bound, math.factorial(2 * i) * math.factorial(2 * j) * III.tail_bound)
            out.converged &= III.converged
    return out
