"""Maximum-likelihood inference for the skewness parameter of skew Brownian motion."""

from .density import invariant_density, log_likelihood, score_kernel, score_kernel_deriv, transition_density
from .mle import MleResult, mle, mle_expansion, mle_expansion_limit, mle_expansion_zero
from .path import SbmPath, read_path_csv, write_path_csv
from .score import ScoreStats, chi2_stat, d_stat, pivot_stat, score_stats
from .simulate import estimate_local_time, sample_local_time, sample_mixed_normal, sample_transition, simulate_path

__version__ = "0.1.0"

__all__ = [
    "MleResult",
    "SbmPath",
    "ScoreStats",
    "chi2_stat",
    "d_stat",
    "estimate_local_time",
    "invariant_density",
    "log_likelihood",
    "mle",
    "mle_expansion",
    "mle_expansion_limit",
    "mle_expansion_zero",
    "pivot_stat",
    "read_path_csv",
    "sample_local_time",
    "sample_mixed_normal",
    "sample_transition",
    "score_kernel",
    "score_kernel_deriv",
    "score_stats",
    "simulate_path",
    "transition_density",
    "write_path_csv",
]
