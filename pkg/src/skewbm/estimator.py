"""Estimator objects in the scikit-learn style.

``SkewnessMLE`` fits one theta to a set of independent paths (the pooled
likelihood).  ``ScoreStatsTransformer`` maps each path to its score
statistics, so it can feed any downstream scikit-learn step.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from ._validation import check_int, check_path_array, check_positive, check_theta
from .density import log_transition_density, sign_and_weight
from .mle import DEFAULT_TOL, solve_from_weights, solve_score_roots
from .score import score_stats_batch


class SkewnessMLE(BaseEstimator):
    """Pooled MLE of the skewness parameter.

    Parameters
    ----------
    n : int
        Observations per unit time.
    tol : float
        Tolerance on the rescaled score at the root.

    Attributes
    ----------
    theta_ : float
        The estimate.
    boundary_ : bool
        True when the likelihood is maximised at +-1.
    n_iter_ : int
        Root-finder iterations.
    """

    def __init__(self, n: int = 1000, tol: float = DEFAULT_TOL):
        self.n = n
        self.tol = tol

    def fit(self, X, y=None):
        n = check_int(self.n, "n", minimum=1)
        check_positive(self.tol, "tol")
        X = check_path_array(X, ensure_2d=True)
        # transitions of all paths pooled into one row: the score is additive
        sgn, w = sign_and_weight(X[:, :-1].ravel(), X[:, 1:].ravel(), 1.0 / n)
        th, sc, bd, it = solve_from_weights(sgn[None, :], w[None, :], n, self.tol)
        theta, score, boundary, iters = float(th[0]), float(sc[0]), bool(bd[0]), int(it[0])
        self.theta_ = theta
        self.score_at_root_ = score
        self.boundary_ = boundary
        self.n_iter_ = iters
        self.n_paths_ = X.shape[0]
        return self

    def predict(self, X):
        """Return the fitted theta for each path in ``X``."""
        check_is_fitted(self, "theta_")
        X = check_path_array(X, ensure_2d=True)
        return np.full(X.shape[0], self.theta_)

    def score(self, X, y=None) -> float:
        """Mean log-likelihood per path at the fitted theta."""
        check_is_fitted(self, "theta_")
        X = check_path_array(X, ensure_2d=True)
        ll = log_transition_density(self.theta_, 1.0 / self.n, X[:, :-1], X[:, 1:])
        return float(ll.sum() / X.shape[0])


class ScoreStatsTransformer(TransformerMixin, BaseEstimator):
    """Map each path to ``S_0 .. S_M`` at a fixed theta (or its own MLE).

    Parameters
    ----------
    n : int
        Observations per unit time.
    theta : float or None
        Evaluation point; ``None`` uses each path's own MLE.
    M : int
        Highest derivative order.
    """

    def __init__(self, n: int = 1000, theta: float | None = 0.0, M: int = 2):
        self.n = n
        self.theta = theta
        self.M = M

    def fit(self, X, y=None):
        check_int(self.n, "n", minimum=1)
        check_int(self.M, "M", minimum=0)
        if self.theta is not None:
            check_theta(self.theta, interior=True)
        check_path_array(X, ensure_2d=True)
        self.n_features_out_ = self.M + 1
        return self

    def transform(self, X):
        check_is_fitted(self, "n_features_out_")
        X = check_path_array(X, ensure_2d=True)
        if self.theta is None:
            theta = solve_score_roots(X, self.n)[0]
            theta = np.clip(theta, -1 + 1e-9, 1 - 1e-9)
        else:
            theta = self.theta
        return score_stats_batch(X, self.n, theta, self.M)

    def get_feature_names_out(self, input_features=None):
        return np.array([f"S{m}" for m in range(self.M + 1)], dtype=object)
