"""Command-line interface.

Exit codes: 0 on success, 2 on invalid input, 3 on numerical failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys

import numpy as np

from . import __version__
from .coefficients import coefficient_table, s_theta
from .covariance import psi_matrix
from .exceptions import NumericalError, ValidationError
from .experiments import ExperimentConfig, run
from .mle import mle
from .path import path_to_csv, read_path_csv
from .score import chi2_stat, d_from_s, pivot_stat, score_stats
from .simulate import simulate_path

EXIT_OK, EXIT_VALIDATION, EXIT_NUMERIC = 0, 2, 3


def parse_range(text: str, integer: bool = False) -> list:
    """``a:b:step`` (inclusive), ``a:b`` for integers, or a comma list."""
    try:
        if ":" in text:
            parts = [float(p) for p in text.split(":")]
            if len(parts) == 2 and integer:
                parts.append(1.0)
            if len(parts) != 3 or parts[2] <= 0:
                raise ValueError
            a, b, h = parts
            count = int(np.floor((b - a) / h + 1e-9)) + 1
            vals = [a + k * h for k in range(count)]
        else:
            vals = [float(p) for p in text.split(",") if p.strip()]
    except ValueError as exc:
        raise ValidationError(f"cannot parse range {text!r}", ["range"]) from exc
    if integer:
        return [int(round(v)) for v in vals]
    return [round(v, 12) for v in vals]


def _global_flags(parser: argparse.ArgumentParser, suppress: bool) -> None:
    d = (lambda v: argparse.SUPPRESS) if suppress else (lambda v: v)
    parser.add_argument("--seed", type=int, default=d(0), help="base random seed")
    parser.add_argument("--threads", type=int, default=d(1), help="worker threads for replications")
    parser.add_argument("--out", default=d(None), help="output file (or directory for experiment)")
    parser.add_argument("--config", default=d(None), help="JSON config file")


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="skewbm", description="Skewness MLE for skew Brownian motion")
    p.add_argument("--version", action="version", version=__version__)
    _global_flags(p, suppress=False)
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, help_):
        sp = sub.add_parser(name, help=help_)
        _global_flags(sp, suppress=True)
        return sp

    sp = add("simulate", "simulate one path and write it as CSV")
    sp.add_argument("--theta", type=float)
    sp.add_argument("--n", type=int)
    sp.add_argument("--T", type=float)

    sp = add("mle", "MLE of theta from a path CSV")
    sp.add_argument("--path")
    sp.add_argument("--tol", type=float)

    sp = add("score", "score statistics of a path CSV at theta")
    sp.add_argument("--path")
    sp.add_argument("--theta", type=float)
    sp.add_argument("--M", type=int)

    sp = add("coeffs", "coefficient table as CSV")
    sp.add_argument("--theta-grid", dest="theta_grid")
    sp.add_argument("--orders")

    sp = add("psi", "covariance matrix at theta = 0 as JSON")
    sp.add_argument("--mmax", type=int)
    sp.add_argument("--tol", type=float)
    sp.add_argument("--l-max", dest="l_max", type=int)
    sp.add_argument("--no-tail", dest="no_tail", action="store_true", default=None)

    add("experiment", "run an experiment described by --config")
    return p


DEFAULTS = {
    "simulate": {"theta": 0.0, "n": 1000, "T": 1.0},
    "mle": {"path": None, "tol": 1e-10},
    "score": {"path": None, "theta": 0.0, "M": 3},
    "coeffs": {"theta_grid": "0:0.9:0.1", "orders": "1:5"},
    "psi": {"mmax": 2, "tol": 1e-6, "l_max": 10_000, "no_tail": False},
    "experiment": {},
}


def _load_config(path):
    if path is None:
        return None
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as exc:
        raise ValidationError(f"cannot read config {path}: {exc}", ["config"]) from exc
    except json.JSONDecodeError as exc:
        raise ValidationError(f"config is not valid JSON: {exc}", ["config"]) from exc


def _resolve(args, config):
    """Fill unset options from the config (if any) and then from defaults."""
    opts = {}
    for key, default in DEFAULTS[args.command].items():
        val = getattr(args, key, None)
        if val is None and config is not None and key in config:
            val = config[key]
        opts[key] = default if val is None else val
    return opts


def _emit(text: str, out) -> None:
    if out:
        with open(out, "w", newline="", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _require(opts, key):
    if opts[key] is None:
        raise ValidationError(f"--{key} is required", [key])
    return opts[key]


def dispatch(args) -> int:
    config = _load_config(args.config)
    if config is not None and config.get("schema_version", 1) != 1:
        raise ValidationError("unsupported schema_version", ["schema_version"])
    if args.command == "experiment":
        if config is None:
            raise ValidationError("experiment needs --config", ["config"])
        cfg = ExperimentConfig.from_dict(config)
        if args.out:
            cfg.output_path = args.out
        if args.threads < 1:
            raise ValidationError("--threads must be >= 1", ["threads"])
        result = run(cfg, threads=args.threads)
        print(json.dumps({"output_path": cfg.output_path, "errors": len(result["errors"])}))
        return EXIT_OK
    opts = _resolve(args, config if config is not None else {})
    if args.command == "simulate":
        path = simulate_path(opts["theta"], opts["n"], opts["T"], args.seed)
        _emit(path_to_csv(path), args.out)
    elif args.command == "mle":
        res = mle(read_path_csv(_require(opts, "path")), opts["tol"])
        _emit(res.to_json() + "\n", args.out)
    elif args.command == "score":
        path = read_path_csv(_require(opts, "path"))
        st = score_stats(path, opts["theta"], max(int(opts["M"]), 1))
        out = {"n": st.n, "theta": st.theta, "T": st.T, "s": st.s.tolist(), "degenerate": st.degenerate}
        if not st.degenerate:
            out["d"] = d_from_s(st.s).tolist()
            out["pivot"] = pivot_stat(st, s_theta(st.theta))
            out["chi2"] = chi2_stat(st)
        _emit(json.dumps(out) + "\n", args.out)
    elif args.command == "coeffs":
        grid = parse_range(str(opts["theta_grid"]))
        orders = parse_range(str(opts["orders"]), integer=True)
        _emit(coefficient_table(grid, orders).to_csv(), args.out)
    elif args.command == "psi":
        psi = psi_matrix(int(opts["mmax"]), float(opts["tol"]), int(opts["l_max"]), tail=not opts["no_tail"])
        _emit(psi.to_json() + "\n", args.out)
    return EXIT_OK


def main(argv=None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return dispatch(args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
