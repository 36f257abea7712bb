import json
import subprocess
import sys

import numpy as np
import pytest

from skewbm.cli import main, parse_range
from skewbm.exceptions import ValidationError
from skewbm.experiments import ExperimentConfig, run


def _write(tmp_path, name, obj):
    f = tmp_path / name
    f.write_text(json.dumps(obj))
    return str(f)


def test_simulate_writes_csv(tmp_path):
    out = tmp_path / "path.csv"
    assert main(["simulate", "--theta", "0.5", "--n", "1000", "--T", "1", "--seed", "7", "--out", str(out)]) == 0
    lines = out.read_text().strip().splitlines()
    assert lines[0] == "t,x" and len(lines) == 1002  # header plus 1001 rows


def test_mle_and_score_from_csv(tmp_path, capsys):
    p = tmp_path / "p.csv"
    main(["simulate", "--theta", "0.3", "--n", "500", "--seed", "3", "--out", str(p)])
    assert main(["mle", "--path", str(p)]) == 0
    r = json.loads(capsys.readouterr().out)
    assert abs(r["score_at_root"]) <= 1e-10 and -1 <= r["theta_hat"] <= 1
    assert main(["score", "--path", str(p), "--theta", "0.2", "--M", "2"]) == 0
    s = json.loads(capsys.readouterr().out)
    assert len(s["s"]) == 3 and s["chi2"] >= 0 and s["d"][1] == -1.0


def test_coeffs_csv(tmp_path):
    out = tmp_path / "c.csv"
    assert main(["coeffs", "--theta-grid", "0:0.9:0.1", "--orders", "1:5", "--out", str(out)]) == 0
    lines = out.read_text().strip().splitlines()
    assert len(lines) > 10 and "," in lines[0]


def test_psi_json(capsys):
    assert main(["psi", "--mmax", "2", "--tol", "1e-6"]) == 0
    d = json.loads(capsys.readouterr().out)
    P = np.array(d["psi"])
    assert P.shape == (3, 3) and P[0, 0] == pytest.approx(1.295, abs=5e-3)


def test_validation_exit_code(tmp_path, capsys):
    assert main(["mle"]) == 2
    assert main(["simulate", "--theta", "1.5"]) == 2
    assert main(["mle", "--path", str(tmp_path / "missing.csv")]) == 2
    cfg = _write(tmp_path, "bad.json", {"kind": "coeff-table", "theta_list": []})
    assert main(["experiment", "--config", cfg]) == 2
    assert "theta_list" in capsys.readouterr().err


def test_config_errors_list_fields():
    with pytest.raises(ValidationError) as exc:
        ExperimentConfig.from_dict({"kind": "ks-rate", "theta_list": [0.2], "n_list": [], "replications": 0})
    assert {"n_list", "replications"} <= set(exc.value.fields)
    with pytest.raises(ValidationError):
        ExperimentConfig.from_dict({"kind": "nope", "bogus": 1})


def test_parse_range():
    assert parse_range("0:0.3:0.1") == [0.0, 0.1, 0.2, 0.3]
    assert parse_range("1:5", integer=True) == [1, 2, 3, 4, 5]
    assert parse_range("0.1,0.5") == [0.1, 0.5]
    with pytest.raises(ValidationError):
        parse_range("1:x")


def _experiment(tmp_path, name, threads):
    cfg = ExperimentConfig(kind="mle-density", theta_list=[0.0, 0.5], n_list=[100], replications=300, seed=5,
                           output_path=str(tmp_path / name))
    run(cfg, threads=threads)
    return sorted((p.name, p.read_bytes()) for p in (tmp_path / name).glob("*.csv"))


def test_experiment_deterministic_and_thread_invariant(tmp_path):
    a = _experiment(tmp_path, "a", 1)
    b = _experiment(tmp_path, "b", 1)
    c = _experiment(tmp_path, "c", 3)
    assert a and a == b == c


def test_experiment_via_cli(tmp_path, capsys):
    cfg = _write(tmp_path, "cfg.json", {"kind": "coeff-table", "theta_list": [0.0, 0.5], "truncation_orders": [1, 2],
                                         "output_path": str(tmp_path / "out")})
    assert main(["experiment", "--config", cfg]) == 0
    assert json.loads(capsys.readouterr().out)["errors"] == 0
    assert (tmp_path / "out" / "summary.csv").exists() and (tmp_path / "out" / "result.json").exists()


def test_module_entry_point():
    r = subprocess.run([sys.executable, "-m", "skewbm", "--version"], capture_output=True, text=True)
    assert r.returncode == 0 and r.stdout.strip()
