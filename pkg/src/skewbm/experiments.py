"""Seeded Monte-Carlo studies driven by a JSON configuration.

Replications are simulated in chunks by ``simulate_paths``.  Replication ``r``
of a cell always uses the same derived seed, so the output does not depend on
the chunking or on the number of worker threads.
"""

from __future__ import annotations

import csv
import io
import json
import logging
import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from numbers import Integral, Real

import numpy as np

from . import __version__
from . import coefficients as coef
from .covariance import psi_matrix
from .exceptions import NumericalError, ValidationError
from .mle import expansion_from_stats, limit_expansion_from_stats, solve_score_roots, zero_expansion_from_stats
from .score import d_from_s, score_stats_batch
from .simulate import simulate_paths
from .stats import (
    histogram,
    ks_distance,
    ks_two_sample,
    local_time_gaussian_cdf,
    mixed_normal_cdf,
    rate_fit,
    sample_skewness,
    scaled_local_time_cdf,
)

log = logging.getLogger(__name__)

SCHEMA_VERSION = 1
KINDS = ("mle-density", "ks-rate", "coeff-table", "psi-table", "expansion-compare", "score-limits")
SIMULATION_KINDS = {"mle-density", "ks-rate", "expansion-compare", "score-limits"}
CHUNK_ELEMENTS = 4_000_000


@dataclass
class ExperimentConfig:
    kind: str
    theta_list: list = field(default_factory=list)
    n_list: list = field(default_factory=list)
    T: float = 1.0
    replications: int = 1000
    seed: int = 0
    truncation_orders: list = field(default_factory=lambda: [1, 3, 5])
    output_path: str = "results"
    schema_version: int = SCHEMA_VERSION
    bins: int = 50
    m_max: int = 2
    tol: float = 1e-6

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        if not isinstance(data, dict):
            raise ValidationError("config must be a JSON object", ["<root>"])
        known = set(cls.__dataclass_fields__)
        unknown = sorted(set(data) - known)
        bad = [f"unknown field {k!r}" for k in unknown]
        if "kind" not in data:
            bad.append("kind")
        if bad:
            raise ValidationError("invalid config: " + ", ".join(bad), unknown + (["kind"] if "kind" not in data else []))
        cfg = cls(**data)
        cfg.validate()
        return cfg

    @classmethod
    def from_json(cls, text: str) -> "ExperimentConfig":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ValidationError(f"config is not valid JSON: {exc}", ["<root>"]) from exc
        return cls.from_dict(data)

    def validate(self) -> None:
        bad: list[str] = []

        def is_int(v, lo):
            return isinstance(v, Integral) and not isinstance(v, bool) and v >= lo

        def is_real(v):
            return isinstance(v, Real) and not isinstance(v, bool) and math.isfinite(v)

        if self.schema_version != SCHEMA_VERSION:
            bad.append("schema_version")
        if self.kind not in KINDS:
            bad.append("kind")
        needs_theta = self.kind != "psi-table"
        if needs_theta and (
            not isinstance(self.theta_list, list)
            or not self.theta_list
            or not all(is_real(t) and abs(t) < 1 for t in self.theta_list)
        ):
            bad.append("theta_list")
        if self.kind in SIMULATION_KINDS and (
            not isinstance(self.n_list, list) or not self.n_list or not all(is_int(n, 1) for n in self.n_list)
        ):
            bad.append("n_list")
        if not (is_real(self.T) and self.T > 0):
            bad.append("T")
        if not is_int(self.replications, 1):
            bad.append("replications")
        if not is_int(self.seed, 0) or self.seed >= 2**64:
            bad.append("seed")
        if (
            not isinstance(self.truncation_orders, list)
            or not self.truncation_orders
            or not all(is_int(m, 1) for m in self.truncation_orders)
        ):
            bad.append("truncation_orders")
        if not isinstance(self.output_path, str) or not self.output_path:
            bad.append("output_path")
        if not is_int(self.bins, 1):
            bad.append("bins")
        if not is_int(self.m_max, 0):
            bad.append("m_max")
        if not (is_real(self.tol) and self.tol > 0):
            bad.append("tol")
        if bad:
            raise ValidationError("invalid config fields: " + ", ".join(bad), bad)


def cell_seed(seed: int, theta_index: int, n_index: int) -> int:
    """Base seed of the (theta, n) cell, derived from the config seed."""
    ss = np.random.SeedSequence(entropy=[int(seed), theta_index, n_index])
    return int(ss.generate_state(2, dtype=np.uint64)[0])


def run_replications(theta, n, T, seed, replications, fn, threads=1):
    """Apply ``fn`` to chunks of simulated paths and concatenate per-key arrays.

    ``fn(X)`` returns a dict of arrays with one entry per row of ``X``.  A chunk
    that raises is retried path by path; failing paths are logged and dropped.
    """
    steps = int(math.floor(n * T * (1.0 + 1e-12)))
    chunk = max(1, min(1000, CHUNK_ELEMENTS // max(steps, 1)))
    starts = list(range(0, replications, chunk))
    errors: list[dict] = []

    def work(start):
        count = min(chunk, replications - start)
        X = simulate_paths(theta, n, T, seed, count, start=start)
        try:
            return fn(X), []
        except (ArithmeticError, NumericalError, ValueError) as exc:
            parts, errs = [], []
            for j in range(count):
                try:
                    parts.append(fn(X[j : j + 1]))
                except (ArithmeticError, NumericalError, ValueError) as e:
                    errs.append({"replication": start + j, "error": str(e)})
            if not parts:
                return {}, errs or [{"replication": start, "error": str(exc)}]
            return {k: np.concatenate([p[k] for p in parts]) for k in parts[0]}, errs

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(work, starts))
    else:
        results = [work(s) for s in starts]
    out: dict[str, list] = {}
    for res, errs in results:
        errors.extend(errs)
        for k, v in res.items():
            out.setdefault(k, []).append(v)
    return {k: np.concatenate(v) for k, v in out.items()}, errors


def _mle_block(theta, n, T, orders=(), d_lim=None, zero_orders=()):
    M = max([2, *orders, *zero_orders])

    def fn(X):
        th, _, boundary, _ = solve_score_roots(X, n)
        s = score_stats_batch(X, n, theta, M)
        out = {"mle": th, "boundary": boundary.astype(float), "S": s}
        for m in orders:
            out[f"exp{m}"] = expansion_from_stats(s, theta, m)
            if d_lim is not None:
                out[f"lim{m}"] = limit_expansion_from_stats(s, theta, m, d_lim)
        for m in zero_orders:
            out[f"zero{m}"] = zero_expansion_from_stats(s, n, m)
        return out

    return fn


def _cells(cfg):
    for a, theta in enumerate(cfg.theta_list):
        for b, n in enumerate(cfg.n_list):
            yield a, float(theta), b, int(n), cell_seed(cfg.seed, a, b)


def _hist_rows(rows, theta, n, name, values, bins, range_=None):
    values = np.asarray(values)
    values = values[np.isfinite(values)]
    counts, edges = histogram(values, bins, range_)
    for c, lo, hi in zip(counts, edges[:-1], edges[1:]):
        rows.append({"theta": theta, "n": n, "statistic": name, "bin_left": lo, "bin_right": hi, "count": int(c)})


def _normalised_mle(th, theta, n, T):
    return (n * T) ** 0.25 * (th - theta) / coef.s_theta(theta)


def _run_mle_density(cfg, threads):
    summary, hist, errors = [], [], []
    for _, theta, _, n, seed in _cells(cfg):
        res, errs = run_replications(theta, n, cfg.T, seed, cfg.replications, _mle_block(theta, n, cfg.T), threads)
        errors += errs
        th = res["mle"]
        z = _normalised_mle(th, theta, n, cfg.T)
        summary.append(
            {
                "theta": theta,
                "n": n,
                "replications": th.size,
                "mean": float(th.mean()),
                "std": float(th.std(ddof=1)) if th.size > 1 else 0.0,
                "skewness": sample_skewness(th - theta) if th.size > 2 else 0.0,
                "boundary_fraction": float(res["boundary"].mean()),
                "ks_mixed_normal": ks_distance(z, mixed_normal_cdf),
            }
        )
        _hist_rows(hist, theta, n, "mle", th, cfg.bins, (-1.0, 1.0))
    return summary, {"histograms.csv": hist}, errors


def _run_ks_rate(cfg, threads):
    summary, errors = [], []
    for _, theta, _, n, seed in _cells(cfg):
        res, errs = run_replications(theta, n, cfg.T, seed, cfg.replications, _mle_block(theta, n, cfg.T), threads)
        errors += errs
        s = res["S"]
        xi1 = coef.xi(1, theta)
        stats = {
            "a_mle": (_normalised_mle(res["mle"], theta, n, cfg.T), mixed_normal_cdf),
            "b_score": (n**0.25 * s[:, 0] / math.sqrt(-xi1), lambda x: local_time_gaussian_cdf(x, cfg.T)),
            "c_local_time": (s[:, 1] / xi1, lambda x: scaled_local_time_cdf(x, 1.0, cfg.T)),
        }
        for name, (vals, cdf) in stats.items():
            d = ks_distance(vals, cdf)
            summary.append(
                {"theta": theta, "n": n, "statistic": name, "ks": d, "ks_sqrt_n": d * math.sqrt(vals.size)}
            )
    fits = []
    for theta in cfg.theta_list:
        for name in ("a_mle", "b_score", "c_local_time"):
            pts = [(r["n"], r["ks"]) for r in summary if r["theta"] == theta and r["statistic"] == name]
            if len(pts) >= 3:
                fit = rate_fit(pts)
                fits.append({"theta": float(theta), "statistic": name, **asdict(fit)})
    return summary, {"rate_fits.csv": fits}, errors


def _run_expansion_compare(cfg, threads):
    summary, hist, errors = [], [], []
    orders = sorted(set(cfg.truncation_orders))
    for _, theta, _, n, seed in _cells(cfg):
        d_lim = [0.0, -1.0] + [coef.d_limit(k, theta) for k in range(2, max(orders) + 1)]
        zero_orders = orders if theta == 0.0 else ()
        fn = _mle_block(theta, n, cfg.T, orders, d_lim, zero_orders)
        res, errs = run_replications(theta, n, cfg.T, seed, cfg.replications, fn, threads)
        errors += errs
        th = res["mle"]
        _hist_rows(hist, theta, n, "mle", th, cfg.bins, (-1.0, 1.0))
        for m in orders:
            for key in (f"exp{m}", f"lim{m}", f"zero{m}"):
                if key not in res:
                    continue
                v = res[key]
                ok = np.isfinite(v)
                summary.append(
                    {
                        "theta": theta,
                        "n": n,
                        "approximation": key,
                        "order": m,
                        "ks_vs_mle": ks_two_sample(v[ok], th),
                        "rms_vs_mle": float(np.sqrt(np.mean((v[ok] - th[ok]) ** 2))),
                        "non_finite": int((~ok).sum()),
                    }
                )
                _hist_rows(hist, theta, n, key, v, cfg.bins, (-1.5, 1.5))
    return summary, {"histograms.csv": hist}, errors


def _run_score_limits(cfg, threads):
    summary, errors = [], []
    for _, theta, _, n, seed in _cells(cfg):
        res, errs = run_replications(theta, n, cfg.T, seed, cfg.replications, _score_block(theta, n), threads)
        errors += errs
        s = res["S"]
        mean_lt = math.sqrt(2.0 * cfg.T / math.pi)
        row = {"theta": theta, "n": n, "replications": s.shape[0]}
        for m in (1, 2, 3):
            row[f"mean_S{m}"] = float(s[:, m].mean())
            row[f"limit_S{m}"] = coef.xi(m, theta) * mean_lt
        chi2 = -math.sqrt(n) * s[:, 0] ** 2 / s[:, 1]
        row["chi2_q95"] = float(np.quantile(chi2, 0.95))
        row["chi2_q95_limit"] = 3.841458820694124
        row["mean_abs_d2"] = float(np.mean(np.abs(d_from_s(s)[:, 2])))
        row["local_time_mean"] = float(np.mean(res["local_time"]))
        row["local_time_limit"] = mean_lt
        summary.append(row)
    return summary, {}, errors


def _score_block(theta, n):
    def fn(X):
        s = score_stats_batch(X, n, theta, 3)
        th, _, boundary, _ = solve_score_roots(X, n)
        th = np.clip(th, -1 + 1e-9, 1 - 1e-9)
        s1_hat = score_stats_batch(X, n, th, 1)[:, 1]
        xi1 = coef.xi1_vectorized(th)
        return {"S": s, "local_time": s1_hat / xi1}

    return fn


def _write_csv(path, rows):
    if not rows:
        return
    cols = list(rows[0].keys())
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\r\n")
    w.writerow(cols)
    for r in rows:
        w.writerow([_fmt(r[c]) for c in cols])
    with open(path, "w", newline="", encoding="utf-8") as fh:
        fh.write(buf.getvalue())


def _fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return str(bool(v)).lower()
    if isinstance(v, (Integral, np.integer)):
        return str(int(v))
    if isinstance(v, (Real, np.floating)):
        return f"{float(v):.17g}"
    return str(v)


def run(config: ExperimentConfig, threads: int = 1) -> dict:
    """Run one experiment, write its artifacts under ``output_path`` and return the result."""
    config.validate()
    t0 = time.perf_counter()
    tables: dict[str, list] = {}
    errors: list = []
    if config.kind == "coeff-table":
        table = coef.coefficient_table(config.theta_list, config.truncation_orders)
        summary = table.rows
    elif config.kind == "psi-table":
        psi = psi_matrix(config.m_max, config.tol)
        summary = psi.to_dict()
    else:
        runner = {
            "mle-density": _run_mle_density,
            "ks-rate": _run_ks_rate,
            "expansion-compare": _run_expansion_compare,
            "score-limits": _run_score_limits,
        }[config.kind]
        summary, tables, errors = runner(config, threads)
    wall = time.perf_counter() - t0
    result = {
        "config": asdict(config),
        "summary": summary,
        "errors": errors,
        "provenance": {"seed": config.seed, "code_version": __version__, "wall_time_s": wall},
    }
    os.makedirs(config.output_path, exist_ok=True)
    if isinstance(summary, list):
        _write_csv(os.path.join(config.output_path, "summary.csv"), summary)
    for name, rows in tables.items():
        _write_csv(os.path.join(config.output_path, name), rows)
    with open(os.path.join(config.output_path, "result.json"), "w", encoding="utf-8") as fh:
        json.dump(result, fh, indent=2, default=_json_default)
    if errors:
        log.warning("%d replications failed; see result.json", len(errors))
    return result


def _json_default(v):
    if isinstance(v, np.generic):
        return v.item()
    if isinstance(v, np.ndarray):
        return v.tolist()
    raise TypeError(type(v))
