"""Limiting coefficients of the score statistics.

Quadrant integrals
    chi^{++}_m(theta) = (1+theta)/sqrt(2 pi) int_{x,y>=0} exp(-(x+y)^2/2) (theta + e^{2xy})^{1-m}
and the closed forms of the three other quadrants give ``chi_m``, ``zeta_m``,
``xi_m``, ``s(theta)``, ``f_m``, ``d_k`` and ``D_k``.  At theta = 0 the
positive-quadrant integral is ``alpha(2m-1) / sqrt(2 pi)`` with
``alpha(c) = arccosh(c) / sqrt(c^2 - 1)``.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from ._validation import check_int, check_theta
from .exceptions import DomainError, NumericalError
from .quadrature import quadrant_integral
from .series import inverse_coeffs_full
from .simulate import make_rng

SQRT_2PI = math.sqrt(2.0 * math.pi)
QUAD_TOL = 1e-9


def alpha(c: float) -> float:
    """``int_{x,y>=0} exp(-(x^2 + y^2)/2 - c x y)``, i.e. ``arccosh(c)/sqrt(c^2-1)``."""
    if c == 1.0:
        return 1.0
    return math.acosh(c) / math.sqrt(c * c - 1.0)


def chi_pp_zero(m: int) -> float:
    """Closed form of ``chi^{++}_m(0)`` for ``m >= 2``."""
    m = check_int(m, "m")
    if m < 2:
        raise DomainError("chi_pp_zero needs m >= 2", ["m"])
    r = math.sqrt(m * (m - 1))
    return math.log(2 * m - 1 + 2 * r) / (2.0 * r) / SQRT_2PI


@lru_cache(maxsize=4096)
def _chi_pp_quad(m: int, theta: float):
    p = m - 1

    def g(t):
        e = np.exp(-2.0 * t)
        return (e / (1.0 + theta * e)) ** p

    value, err = quadrant_integral(g)
    scale = (1.0 + theta) / SQRT_2PI
    return scale * value, scale * err


def chi_pp(m: int, theta, return_error: bool = False):
    """``chi^{++}_m(theta)`` by tensor Gauss-Legendre quadrature (``m >= 1``)."""
    m = check_int(m, "m", minimum=1)
    theta = check_theta(theta, interior=True)
    value, err = _chi_pp_quad(m, theta)
    if not err <= QUAD_TOL * max(1.0, abs(value)):
        raise NumericalError(f"chi_pp({m}, {theta}) did not converge", residual=err)
    return (value, err) if return_error else value


def chi_pp_series(m: int, theta, terms: int = 4000) -> float:
    """``chi^{++}_m`` from its power series in theta (slow for theta near 1)."""
    m = check_int(m, "m", minimum=1)
    theta = check_theta(theta, interior=True)
    if m == 1:
        return (1.0 + theta) / SQRT_2PI
    total = math.fsum(
        math.comb(m - 2 + j, j) * (-theta) ** j * alpha(2 * (m - 1 + j) + 1) for j in range(terms)
    )
    return (1.0 + theta) * total / SQRT_2PI


def chi_pm(m: int, theta, quadrant: str = "+-") -> float:
    """Closed forms of the mixed-sign quadrants ``+-`` and ``-+``."""
    m = check_int(m, "m", minimum=1)
    theta = check_theta(theta, interior=True)
    if quadrant == "+-":
        return (-1.0) ** m * (1.0 + theta) / (SQRT_2PI * (1.0 - theta) ** (m - 1))
    if quadrant == "-+":
        return (1.0 - theta) / (SQRT_2PI * (1.0 + theta) ** (m - 1))
    raise DomainError(f"quadrant must be '+-' or '-+', got {quadrant!r}", ["quadrant"])


def chi_quadrants(m: int, theta) -> dict[str, float]:
    """The four quadrant contributions ``{'++', '--', '+-', '-+'}`` to ``chi_m``."""
    theta = check_theta(theta, interior=True)
    return {
        "++": chi_pp(m, theta),
        "--": (-1.0) ** m * chi_pp(m, -theta),
        "+-": chi_pm(m, theta, "+-"),
        "-+": chi_pm(m, theta, "-+"),
    }


def chi(m: int, theta) -> float:
    """``chi_m(theta)``; exactly 0 for ``m = 1``."""
    m = check_int(m, "m", minimum=1)
    theta = check_theta(theta, interior=True)
    if m == 1:
        return 0.0
    q = chi_quadrants(m, theta)
    return math.fsum(q.values())


def zeta(m: int, theta) -> float:
    """``chi^{++} + chi^{+-} - chi^{--} - chi^{-+}``."""
    q = chi_quadrants(m, theta)
    return math.fsum([q["++"], q["+-"], -q["--"], -q["-+"]])


def chi_derivative(m: int, theta) -> float:
    """Exact ``d chi_m / d theta``.

    ``-(m-1) chi_{m+1} + (chi^{++}_m + chi^{+-}_m)/(1+theta) - (chi^{--}_m + chi^{-+}_m)/(1-theta)``,
    which reduces to ``-(m-1) chi_{m+1} + zeta_m`` at theta = 0.
    """
    q = chi_quadrants(m, theta)
    return (
        -(m - 1) * chi(m + 1, theta)
        + (q["++"] + q["+-"]) / (1.0 + theta)
        - (q["--"] + q["-+"]) / (1.0 - theta)
    )


def zeta_derivative(m: int, theta) -> float:
    """Exact ``d zeta_m / d theta`` (equals ``-(m-1) zeta_{m+1} + chi_m`` at 0)."""
    q = chi_quadrants(m, theta)
    return (
        -(m - 1) * zeta(m + 1, theta)
        + (q["++"] + q["+-"]) / (1.0 + theta)
        + (q["--"] + q["-+"]) / (1.0 - theta)
    )


def xi(m: int, theta) -> float:
    """``xi_m = m! (-1)^m chi_{m+1}``; ``xi_0 = 0``."""
    m = check_int(m, "m", minimum=0)
    return math.factorial(m) * (-1.0) ** m * chi(m + 1, theta)


def s_theta(theta) -> float:
    """``s(theta) = (-xi_1(theta))^(-1/2) = chi_2(theta)^(-1/2)``."""
    return chi(2, theta) ** -0.5


def s_theta_approx(theta) -> float:
    """Rational approximation ``sqrt(1-t^2) / sqrt(1.292 + 0.232 t^2 + 0.071 t^4)``."""
    t = check_theta(theta)
    t2 = t * t
    return math.sqrt(1.0 - t2) / math.sqrt(1.292 + 0.232 * t2 + 0.071 * t2 * t2)


def f(m: int, theta) -> float:
    """Boundary-layer form ``(-1)^m (1-theta^2)^m xi_m / m! = (1-theta^2)^m chi_{m+1}``."""
    m = check_int(m, "m", minimum=0)
    theta = check_theta(theta, interior=True)
    return (1.0 - theta * theta) ** m * chi(m + 1, theta)


def d_limit(k: int, theta) -> float:
    """``d_k(theta) = -xi_k / (k! xi_1) = s(theta)^2 xi_k / k!``."""
    k = check_int(k, "k", minimum=0)
    return -xi(k, theta) / (math.factorial(k) * xi(1, theta))


def D_limit(k: int, theta) -> float:
    """Coefficient ``D_k(theta)`` of the inverse series built from ``d_2..d_k``."""
    k = check_int(k, "k", minimum=1)
    d = np.zeros(k + 1)
    for j in range(2, k + 1):
        d[j] = d_limit(j, theta)
    return float(inverse_coeffs_full(d, k)[k])


def D_limit_all(K: int, theta) -> np.ndarray:
    """``[D_0, D_1, ..., D_K]`` at ``theta`` (``D_0 = 0``, ``D_1 = 1``)."""
    K = check_int(K, "K", minimum=1)
    d = np.zeros(K + 1)
    for j in range(2, K + 1):
        d[j] = d_limit(j, theta)
    return inverse_coeffs_full(d, K)


def integral_I(theta) -> float:
    """``int_{x,y>=0} (1 - e^{-2xy}) e^{-4xy} / (1 - theta^2 e^{-4xy}) e^{-(x+y)^2/2}``."""
    theta = check_theta(theta)
    t2 = theta * theta

    def g(t):
        e2 = np.exp(-2.0 * t)
        num = -np.expm1(-2.0 * t) * e2 * e2
        if t2 == 1.0:
            return e2 * e2 / (1.0 + e2)
        return num / (1.0 - t2 * e2 * e2)

    value, err = quadrant_integral(g)
    if err > QUAD_TOL:
        raise NumericalError("integral_I did not converge", residual=err)
    return value


def chi2_via_I(theta) -> float:
    """``chi_2`` through ``(2/sqrt(2 pi)) ((1+t^2)/(1-t^2) + sqrt(2 pi) chi^{++}_2(0) - t^2 I(t))``."""
    theta = check_theta(theta, interior=True)
    t2 = theta * theta
    return 2.0 / SQRT_2PI * ((1.0 + t2) / (1.0 - t2) + SQRT_2PI * chi_pp_zero(2) - t2 * integral_I(theta))


def beta(ell: int) -> float:
    """``sqrt(2/pi) (sqrt(2 pi) chi^{++}_ell(0) + (-1)^ell)``, i.e. ``chi_ell(0)`` for even ell."""
    ell = check_int(ell, "ell", minimum=1)
    pp = alpha(2 * ell - 1)
    return math.sqrt(2.0 / math.pi) * (pp + (-1.0) ** ell)


def chi_taylor(m: int, order: int) -> np.ndarray:
    """Taylor coefficients ``c_0..c_order`` of ``chi_m`` about theta = 0.

    Built exactly from ``alpha`` values: the positive quadrant expands as
    ``(1+t) sum_j C(m-2+j, j) (-t)^j alpha(2(m-1+j)+1)``, the mixed quadrants
    are rational, and the negative quadrants follow by ``t -> -t``.
    """
    m = check_int(m, "m", minimum=1)
    order = check_int(order, "order", minimum=0)
    J = order + 1
    if m == 1:
        pp = np.zeros(J)
        pp[0] = 1.0
        pm = -pp
    else:
        pp = np.array([math.comb(m - 2 + j, j) * (-1.0) ** j * alpha(2 * (m - 1 + j) + 1) for j in range(J)])
        pm = np.array([(-1.0) ** m * math.comb(m - 2 + j, j) for j in range(J)])
    one_plus = np.zeros(J)
    one_plus[0] = 1.0
    if J > 1:
        one_plus[1] = 1.0
    pp = np.convolve(one_plus, pp)[:J]
    pm = np.convolve(one_plus, pm)[:J]
    flip = (-1.0) ** np.arange(J)
    total = pp + (-1.0) ** m * flip * pp + pm + (-1.0) ** m * flip * pm
    return total / SQRT_2PI


def chi_pp_mc(m: int, theta, n_draws: int, seed, rescaled: bool = True):
    """Monte-Carlo estimate of ``chi^{++}_m`` with its standard error.

    Uses ``(sqrt(2 pi)/4)(1+theta) E[(e^a + theta e^-a) / (theta + e^{2a})^m]``
    with ``a = |G G'|``.  With ``rescaled=True`` the integrand is multiplied by
    ``(1-theta)^m`` inside the mean and divided back outside.
    """
    m = check_int(m, "m", minimum=1)
    theta = check_theta(theta, interior=True)
    n_draws = check_int(n_draws, "n_draws", minimum=1)
    h = mc_integrand(m, theta, n_draws, seed, rescaled)
    factor = SQRT_2PI / 4.0 * (1.0 + theta)
    if rescaled:
        factor /= (1.0 - theta) ** m
    se = float(h.std(ddof=1) / math.sqrt(n_draws)) if n_draws > 1 else math.inf
    return factor * float(h.mean()), factor * se


def mc_integrand(m: int, theta: float, n_draws: int, seed, rescaled: bool = True) -> np.ndarray:
    rng = make_rng(seed)
    a = np.abs(rng.standard_normal(n_draws) * rng.standard_normal(n_draws))
    # (e^a + theta e^-a) / (theta + e^{2a})^m rewritten with e^{-2a} to avoid overflow
    e = np.exp(-2.0 * a)
    h = np.exp(-(2 * m - 1) * a) * (1.0 + theta * e) ** (1 - m)
    if rescaled:
        h = h * (1.0 - theta) ** m
    return h


@dataclass
class CoefficientTable:
    """Coefficients on a theta grid for a range of orders, one row per (theta, m)."""

    theta_grid: np.ndarray
    orders: list[int]
    rows: list[dict] = field(default_factory=list)

    COLUMNS = ("theta", "m", "chi_pp", "chi_mm", "chi_pm", "chi_mp", "chi", "zeta", "xi", "s_theta", "f", "method", "err_est")

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\r\n")
        writer.writerow(self.COLUMNS)
        for row in self.rows:
            writer.writerow([_fmt(row[c]) for c in self.COLUMNS])
        return buf.getvalue()

    def value(self, theta: float, m: int, column: str):
        for row in self.rows:
            if row["m"] == m and row["theta"] == theta:
                return row[column]
        raise KeyError((theta, m))


def _fmt(v) -> str:
    if isinstance(v, str):
        return v
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return f"{float(v):.17g}"


def coefficient_table(theta_grid, orders) -> CoefficientTable:
    """Evaluate every coefficient for each ``theta`` and ``m``."""
    grid = np.array(sorted(float(t) for t in theta_grid))
    orders = [check_int(m, "m", minimum=1) for m in orders]
    if grid.size == 0 or not orders:
        raise DomainError("empty theta grid or order range", ["theta_grid", "orders"])
    for t in grid:
        check_theta(t, interior=True)
    table = CoefficientTable(theta_grid=grid, orders=orders)
    for t in grid:
        st = s_theta(t)
        for m in orders:
            if t == 0.0 and m >= 2:
                pp, err, method = chi_pp_zero(m), 0.0, "closed-form"
                mm = (-1.0) ** m * pp
            elif m == 1:
                pp, err, method = (1.0 + t) / SQRT_2PI, 0.0, "closed-form"
                mm = -(1.0 - t) / SQRT_2PI
            else:
                pp, e1 = chi_pp(m, t, return_error=True)
                mm_raw, e2 = chi_pp(m, -t, return_error=True)
                mm, err, method = (-1.0) ** m * mm_raw, e1 + e2, "quadrature"
            pm, mp = chi_pm(m, t, "+-"), chi_pm(m, t, "-+")
            table.rows.append(
                {
                    "theta": float(t),
                    "m": m,
                    "chi_pp": pp,
                    "chi_mm": mm,
                    "chi_pm": pm,
                    "chi_mp": mp,
                    "chi": 0.0 if m == 1 else math.fsum([pp, mm, pm, mp]),
                    "zeta": math.fsum([pp, pm, -mm, -mp]),
                    "xi": xi(m, t),
                    "s_theta": st,
                    "f": f(m, t),
                    "method": method,
                    "err_est": err,
                }
            )
    return table


_XI1_EDGE = 0.99


@lru_cache(maxsize=1)
def _f1_spline():
    from scipy.interpolate import CubicSpline

    grid = np.linspace(-_XI1_EDGE, _XI1_EDGE, 397)
    return CubicSpline(grid, [f(1, t) for t in grid])


def xi1_vectorized(theta) -> np.ndarray:
    """``xi_1`` for an array of theta values.

    Inside ``|theta| <= 0.99`` a cubic spline of the smooth product
    ``(1 - theta^2) chi_2(theta)`` is used (relative error below 1e-6);
    outside it each value is computed directly.
    """
    th = np.asarray(theta, dtype=float)
    out = np.empty(th.shape)
    inner = np.abs(th) <= _XI1_EDGE
    out[inner] = -_f1_spline()(th[inner]) / (1.0 - th[inner] ** 2)
    for idx in zip(*np.nonzero(~inner)):
        out[idx] = xi(1, float(th[idx]))
    return out
