"""Exact simulation of discretely observed paths and of the limiting laws.

One transition is sampled in two stages.  The modulus ``a = |x + sqrt(dt) Z|``
has a law that does not depend on theta.  The sign is then drawn with the
conditional probability implied by the density, which is exact.

Seeding: each replication ``r`` of a batch gets its own Philox generator keyed
by ``SeedSequence(base_seed, spawn_key=(r,))``.  A batch split across workers
is therefore identical to the serial batch.
"""

from __future__ import annotations

import math

import numpy as np

from ._validation import check_int, check_positive, check_theta, n_observations
from .path import SbmPath


def make_rng(seed) -> np.random.Generator:
    """Build a generator from an int, a ``SeedSequence`` or a ``Generator``."""
    if isinstance(seed, np.random.Generator):
        return seed
    if not isinstance(seed, np.random.SeedSequence):
        seed = np.random.SeedSequence(seed)
    return np.random.Generator(np.random.Philox(seed))


def replication_seed(base_seed: int, r: int) -> np.random.SeedSequence:
    """Seed of replication ``r``; depends only on ``(base_seed, r)``."""
    return np.random.SeedSequence(entropy=base_seed, spawn_key=(int(r),))


def _plus_probability(theta: float, x, a, dt: float):
    ax = np.abs(x)
    e = np.exp(-2.0 * a * ax / dt)
    return np.where(x >= 0.0, (1.0 + theta * e) / (1.0 + e), (1.0 + theta) * e / (1.0 + e))


def _step(theta: float, x, dt: float, z, u):
    a = np.abs(x + math.sqrt(dt) * z)
    return np.where(u < _plus_probability(theta, x, a, dt), a, -a)


def sample_transition(theta, x, dt, rng, size=None):
    """Draw from ``p_theta(dt, x, .)``; ``size`` draws share the start ``x``."""
    theta = check_theta(theta)
    dt = check_positive(dt, "dt")
    rng = make_rng(rng)
    z = rng.standard_normal(size)
    u = rng.random(size)
    out = _step(theta, np.asarray(x, dtype=float), dt, z, u)
    return out if np.ndim(out) else float(out)


def _path_from_draws(theta: float, dt: float, z: np.ndarray, u: np.ndarray) -> np.ndarray:
    """Run the chain for all rows at once; ``z`` and ``u`` have shape (R, N)."""
    R, N = z.shape
    out = np.empty((N + 1, R))
    out[0] = 0.0
    zt = np.ascontiguousarray(z.T)
    ut = np.ascontiguousarray(u.T)
    for i in range(N):
        out[i + 1] = _step(theta, out[i], dt, zt[i], ut[i])
    return np.ascontiguousarray(out.T)


def simulate_path(theta, n: int, T: float, seed) -> SbmPath:
    """Simulate ``X_{i/n}``, ``i = 0..floor(nT)``, started at 0."""
    theta = check_theta(theta)
    n = check_int(n, "n", minimum=1)
    T = check_positive(T, "T")
    N = n_observations(n, T) - 1
    rng = make_rng(seed)
    z = rng.standard_normal(N)
    u = rng.random(N)
    values = _path_from_draws(theta, 1.0 / n, z[None, :], u[None, :])[0]
    return SbmPath(n=n, T=T, values=values)


def simulate_paths(theta, n: int, T: float, seed: int, replications: int, start: int = 0) -> np.ndarray:
    """Simulate replications ``start .. start + replications - 1`` as rows.

    Row ``j`` equals ``simulate_path(theta, n, T, replication_seed(seed, start + j)).values``.
    """
    theta = check_theta(theta)
    n = check_int(n, "n", minimum=1)
    T = check_positive(T, "T")
    replications = check_int(replications, "replications", minimum=1)
    N = n_observations(n, T) - 1
    z = np.empty((replications, N))
    u = np.empty((replications, N))
    for j in range(replications):
        rng = make_rng(replication_seed(seed, start + j))
        z[j] = rng.standard_normal(N)
        u[j] = rng.random(N)
    return _path_from_draws(theta, 1.0 / n, z, u)


def sample_local_time(rng, size=None, T: float = 1.0):
    """Draw the local time at 0 over ``[0, T]``: ``sqrt(T) |N(0, 1)|``."""
    T = check_positive(T, "T")
    out = math.sqrt(T) * np.abs(make_rng(rng).standard_normal(size))
    return out if np.ndim(out) else float(out)


def sample_mixed_normal(rng, size=None):
    """Draw ``G / sqrt(L)`` with ``G`` standard normal and ``L = |N(0,1)|`` independent."""
    rng = make_rng(rng)
    g = rng.standard_normal(size)
    lt = np.abs(rng.standard_normal(size))
    out = g / np.sqrt(lt)
    return out if np.ndim(out) else float(out)


def estimate_local_time(path: SbmPath, theta_hat) -> float:
    """Local-time estimate ``S_1(n, theta_hat) / xi_1(theta_hat)``.

    The raw ratio is returned; it is not forced to be nonnegative.
    """
    from .coefficients import xi
    from .score import score_stats

    theta_hat = check_theta(theta_hat, interior=True, name="theta_hat")
    stats = score_stats(path, theta_hat, 1)
    return stats.s[1] / xi(1, theta_hat)
