"""Maximum-likelihood estimation of theta and the series expansions of the MLE.

The rescaled score ``theta -> S_0(n, theta)`` is strictly decreasing on
``(-1, 1)`` because its derivative is ``-sum k^2 / sqrt(n)``.  The root is found
by Newton steps on the analytic derivative, falling back to bisection whenever
a step leaves the current bracket.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass

import numpy as np

from ._validation import check_int, check_positive, check_theta
from .density import sign_and_weight
from .exceptions import DomainError
from .path import SbmPath
from .score import d_from_s, score_stats, score_stats_batch
from .series import evaluate, inverse_coeffs_full, zero_theta_coeffs

EPS = 1e-9
DEFAULT_TOL = 1e-10
BRACKET_TOL = 1e-12
MAX_ITER = 200


@dataclass(frozen=True)
class MleResult:
    theta_hat: float
    score_at_root: float
    boundary_flag: bool
    iterations: int

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


def _score_and_slope(theta, s, w, root_n):
    k = s * w / (1.0 + s * theta[:, None] * w)
    return k.sum(axis=1) / root_n, -(k * k).sum(axis=1) / root_n


def solve_score_roots(X, n: int, tol: float = DEFAULT_TOL):
    """Vectorised MLE for each row of ``X``.

    Returns ``(theta_hat, score_at_root, boundary_flag, iterations)`` arrays.
    """
    X = np.atleast_2d(np.asarray(X, dtype=float))
    s, w = sign_and_weight(X[:, :-1], X[:, 1:], 1.0 / n)
    return solve_from_weights(s, w, n, tol)


def solve_from_weights(s, w, n: int, tol: float = DEFAULT_TOL):
    """Root of the score for rows of transition signs ``s`` and weights ``w``."""
    tol = check_positive(tol, "tol")
    R = s.shape[0]
    root_n = math.sqrt(n)

    lo = np.full(R, -1.0 + EPS)
    hi = np.full(R, 1.0 - EPS)
    f_lo, _ = _score_and_slope(lo, s, w, root_n)
    f_hi, _ = _score_and_slope(hi, s, w, root_n)

    theta = np.zeros(R)
    score = np.zeros(R)
    iters = np.zeros(R, dtype=int)
    upper = f_hi >= 0.0
    lower = (f_lo <= 0.0) & ~upper
    theta[upper], score[upper] = 1.0, f_hi[upper]
    theta[lower], score[lower] = -1.0, f_lo[lower]
    boundary = upper | lower

    act = np.flatnonzero(~boundary)
    th = np.zeros(act.size)
    a, b = lo[act], hi[act]
    sa, wa = s[act], w[act]
    for it in range(1, MAX_ITER + 1):
        if act.size == 0:
            break
        f, fp = _score_and_slope(th, sa, wa, root_n)
        iters[act] = it
        done = (np.abs(f) <= tol) | (b - a <= BRACKET_TOL)
        theta[act[done]] = th[done]
        score[act[done]] = f[done]
        keep = ~done
        act, th, f, fp, a, b = act[keep], th[keep], f[keep], fp[keep], a[keep], b[keep]
        sa, wa = sa[keep], wa[keep]
        a = np.where(f > 0.0, th, a)
        b = np.where(f > 0.0, b, th)
        step = th - f / fp
        bad = ~((step > a) & (step < b)) | ~np.isfinite(step)
        th = np.where(bad, 0.5 * (a + b), step)
    if act.size:
        theta[act], score[act] = th, _score_and_slope(th, sa, wa, root_n)[0]
    return theta, score, boundary, iters


def mle(path: SbmPath, tol: float = DEFAULT_TOL) -> MleResult:
    """MLE of theta from one path; ``score_at_root`` is ``S_0`` at the root."""
    if not isinstance(path, SbmPath):
        raise DomainError("mle expects an SbmPath", ["path"])
    th, sc, bd, it = solve_score_roots(path.values, path.n, tol)
    theta_hat, boundary = float(th[0]), bool(bd[0])
    score = float(sc[0]) if boundary else float(score_stats(path, theta_hat, 0).s[0])
    return MleResult(theta_hat, score, boundary, int(it[0]))


def expansion_from_stats(s, theta, M: int):
    """``theta + Phi^[M](D_n, d_0)`` from score statistics ``s[..., 0..M]``."""
    d = d_from_s(np.asarray(s, dtype=float)[..., : M + 1])
    D = inverse_coeffs_full(d, M)
    return theta + evaluate(D, d[..., 0])


def limit_expansion_from_stats(s, theta, M: int, d_limit):
    """Same as :func:`expansion_from_stats` with deterministic ``D_k(theta)``."""
    d = d_from_s(np.asarray(s, dtype=float)[..., :2])
    dl = np.zeros(M + 1)
    dl[2:] = np.asarray(d_limit, dtype=float)[2 : M + 1]
    D = inverse_coeffs_full(dl, M)
    return theta + evaluate(D, d[..., 0])


def zero_expansion_from_stats(s, n: float, M: int):
    """Expansion in powers of ``n^(-1/4)`` for ``theta = 0``."""
    d = d_from_s(np.asarray(s, dtype=float)[..., : M + 1])
    a = zero_theta_coeffs(d, n, M)
    return evaluate(a, float(n) ** -0.25)


def mle_expansion(path: SbmPath, theta, M: int) -> float:
    """Truncated expansion ``theta_n^[M]`` with random coefficients."""
    theta = check_theta(theta, interior=True)
    M = check_int(M, "M", minimum=1)
    stats = score_stats(path, theta, M)
    return float(expansion_from_stats(stats.s, theta, M))


def mle_expansion_limit(path: SbmPath, theta, M: int, coeff_table=None) -> float:
    """Truncated expansion with the limiting coefficients ``d_k(theta)``.

    ``coeff_table`` is an optional sequence with ``coeff_table[k] = d_k(theta)``
    for ``k = 2..M``; it is computed when omitted.
    """
    theta = check_theta(theta, interior=True)
    M = check_int(M, "M", minimum=1)
    if coeff_table is None:
        from .coefficients import d_limit

        coeff_table = [0.0, -1.0] + [d_limit(k, theta) for k in range(2, M + 1)]
    stats = score_stats(path, theta, 1)
    return float(limit_expansion_from_stats(stats.s, theta, M, coeff_table))


def mle_expansion_zero(path: SbmPath, M_odd: int) -> float:
    """Expansion of the MLE when the true theta is 0."""
    M = check_int(M_odd, "M_odd", minimum=1)
    stats = score_stats(path, 0.0, M)
    return float(zero_expansion_from_stats(stats.s, path.n, M))


def mle_batch(X, n: int, tol: float = DEFAULT_TOL) -> np.ndarray:
    """MLE of each row of ``X`` (boundary rows give +-1)."""
    return solve_score_roots(X, n, tol)[0]


def expansions_batch(X, n: int, theta: float, orders) -> dict[int, np.ndarray]:
    """``theta_n^[M]`` for each row and each ``M`` in ``orders``."""
    orders = sorted(set(int(m) for m in orders))
    s = score_stats_batch(X, n, theta, max(orders))
    return {M: expansion_from_stats(s, theta, M) for M in orders}
