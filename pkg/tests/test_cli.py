import csv
import io
import json
import math
import subprocess
import sys

import pytest

from nlmsmoments import cli
from nlmsmoments.config import ExperimentConfig, bundled_config_path, load_config, parse_config
from nlmsmoments.errors import ConditioningError, ValidationError

GOLDEN_HEADER = "mu,iter,emse_theory,msd_theory,mse_theory,emse_sim,emse_sim_se,msd_sim,msd_sim_se,mse_sim,mse_sim_se"

SMALL = {
    "scenario": {
        "w_opt": [0.227, 0.46, 0.688, 0.46, 0.227],
        "mu": [0.1],
        "noise_var": 0.01,
        "input_cov": {"toeplitz_alpha": 0.5},
    },
    "iterations": 300,
    "runs": 20,
    "master_seed": 7,
    "oracle_samples": 20000,
}


def _write(tmp_path, data, name="cfg.json"):
    p = tmp_path / name
    p.write_text(json.dumps(data) if not isinstance(data, str) else data)
    return str(p)


def run(argv):
    out, err = io.StringIO(), io.StringIO()
    code = cli.main(argv, stdout=out, stderr=err)
    return code, out.getvalue(), err.getvalue()


def _rows(text):
    return list(csv.DictReader(io.StringIO(text)))


def test_golden_header(tmp_path):
    code, out, _ = run(["predict", "--config", _write(tmp_path, SMALL)])
    assert code == 0
    assert out.splitlines()[0] == GOLDEN_HEADER
    assert ",".join(cli.CSV_HEADER) == GOLDEN_HEADER
    assert cli.CSV_SCHEMA_VERSION == 1


def test_predict_bundled_final_row():
    code, out, err = run(["predict"])
    assert code == 0
    rows = _rows(out)
    for mu in ("0.1", "0.01"):
        mine = [r for r in rows if r["mu"] == mu]
        last, steady = mine[-2], mine[-1]
        assert last["iter"] == "19999" and steady["iter"] == "steady"
        assert float(last["mse_theory"]) == pytest.approx(float(steady["emse_theory"]) + 0.01, abs=1e-6)
        assert last["emse_sim"] == ""
    assert "mean-square bound=2" in err


def test_predict_unstable_is_flagged(tmp_path):
    cfg = dict(SMALL, scenario=dict(SMALL["scenario"], mu=[2.5]))
    code, out, err = run(["predict", "--config", _write(tmp_path, cfg)])
    assert code == 0
    rows = _rows(out)
    assert len(rows) == 301
    assert rows[-1]["iter"] == "unstable"
    assert "unstable" in err


def test_zero_iterations_header_only(tmp_path):
    cfg = dict(SMALL, iterations=0)
    for cmd in ("predict", "simulate", "compare"):
        code, out, _ = run([cmd, "--config", _write(tmp_path, cfg)])
        assert code == 0
        assert out == GOLDEN_HEADER + "\n"


def test_simulate_deterministic_and_seed_override(tmp_path):
    path = _write(tmp_path, SMALL)
    a = run(["simulate", "--config", path])[1]
    b = run(["simulate", "--config", path])[1]
    c = run(["simulate", "--config", path, "--seed", "8"])[1]
    d = run(["simulate", "--config", path, "--runs", "5"])[1]
    assert a == b
    assert a != c and a != d
    rows = _rows(a)
    assert rows[0]["emse_theory"] == "" and float(rows[0]["mse_sim_se"]) > 0


def test_compare_writes_file_and_summary(tmp_path):
    out_path = tmp_path / "cmp.csv"
    code, out, _ = run(["compare", "--config", _write(tmp_path, SMALL), "--out", str(out_path)])
    assert code == 0
    assert "steady-state gap" in out and "PASS" in out
    rows = _rows(out_path.read_text())
    assert rows[-1]["iter"] == "steady"
    assert all(rows[0][c] != "" for c in cli.CSV_HEADER)


def test_compare_threshold_failure(tmp_path, monkeypatch):
    monkeypatch.setattr(cli, "TRANSIENT_GAP_DB", 0.0)
    code, _, err = run(["compare", "--config", _write(tmp_path, SMALL)])
    assert code == 3
    assert "FAIL" in err


def test_db_flag(tmp_path):
    path = _write(tmp_path, SMALL)
    lin = _rows(run(["compare", "--config", path])[1])
    db = _rows(run(["compare", "--config", path, "--db"])[1])
    for i in (0, 150, 300):
        assert float(db[i]["mse_theory"]) == pytest.approx(10 * math.log10(float(lin[i]["mse_theory"])))
        se = 10 / math.log(10) * float(lin[i]["mse_sim_se"]) / float(lin[i]["mse_sim"])
        assert float(db[i]["mse_sim_se"]) == pytest.approx(se)


def test_moments_report(tmp_path, monkeypatch):
    path = _write(tmp_path, SMALL)
    code, out, _ = run(["moments", "--config", path])
    assert code == 0
    assert "E[s_kkbar^2]" in out and "max |z|" in out
    monkeypatch.setattr(cli, "MOMENT_Z_LIMIT", 0.0)
    assert run(["moments", "--config", path])[0] == 3


def test_stability_report(tmp_path):
    code, out, _ = run(["stability", "--config", _write(tmp_path, SMALL)])
    assert code == 0
    assert "mean-square stability bound: mu < 2" in out
    statuses = [line.split()[-1] for line in out.splitlines()[4:]]
    assert "stable" in statuses and "unstable" in statuses


def test_conditioning_exit_code(tmp_path, monkeypatch):
    def boom(s):
        raise ConditioningError("forced")

    monkeypatch.setattr(cli, "derived_moments", boom)
    code, _, err = run(["moments", "--config", _write(tmp_path, SMALL)])
    assert code == 2 and "forced" in err


def test_unknown_flag_exits_with_usage(capsys):
    with pytest.raises(SystemExit) as exc:
        cli.main(["predict", "--bogus"])
    assert exc.value.code == 1
    assert "usage:" in capsys.readouterr().err


def test_missing_command(capsys):
    with pytest.raises(SystemExit) as exc:
        cli.main([])
    assert exc.value.code == 1


def test_json_syntax_error_reports_position(tmp_path):
    path = _write(tmp_path, '{\n  "scenario": {\n    "mu": 0.1,\n  }\n}')
    code, _, err = run(["predict", "--config", path])
    assert code == 1
    assert ":4:" in err


@pytest.mark.parametrize(
    "patch,field",
    [
        ({"iterations": -1}, "iterations"),
        ({"runs": 0}, "runs"),
        ({"bogus": 1}, "unknown keys"),
        ({"scenario": dict(SMALL["scenario"], w_opt=[1, "x"])}, "scenario.w_opt[1]"),
        ({"scenario": dict(SMALL["scenario"], w_opt=[[1, 2, 3]])}, "scenario.w_opt[0]"),
        ({"scenario": dict(SMALL["scenario"], input_cov={"toeplitz_alpha": 1.5})}, "toeplitz_alpha"),
        ({"scenario": dict(SMALL["scenario"], input_cov={"matrix": [[1, 0], [0, 1]]})}, "input_cov.matrix"),
        ({"scenario": dict(SMALL["scenario"], input_cov={"diag": 1})}, "input_cov"),
        ({"scenario": dict(SMALL["scenario"], mu=[-0.1])}, "scenario.mu[0]"),
        ({"scenario": dict(SMALL["scenario"], noise_var=True)}, "scenario.noise_var"),
    ],
)
def test_field_diagnostics(tmp_path, patch, field):
    code, _, err = run(["predict", "--config", _write(tmp_path, dict(SMALL, **patch))])
    assert code == 1
    assert field in err


def test_missing_config_file(tmp_path):
    code, _, err = run(["predict", "--config", str(tmp_path / "none.json")])
    assert code == 1 and "cannot read" in err


def test_dump_config_round_trip(tmp_path):
    data = {
        "scenario": {
            "w_opt": [[1.0, 0.5], -0.25, [0.0, 2.0]],
            "mu": 0.3,
            "noise_var": 0.02,
            "input_cov": {"matrix": [[2.0, [0.0, 0.6], 0.1], [[0.0, -0.6], 1.5, 0.0], [0.1, 0.0, 1.0]]},
            "walk_cov": {"scaled_identity": 1e-6},
            "spread": True,
        },
        "iterations": 10,
        "stability_mu_grid": [0.5, 1.0],
    }
    path = _write(tmp_path, data)
    cfg = load_config(path)
    code, out, _ = run(["predict", "--config", path, "--dump-config", "--seed", "5"])
    assert code == 0
    again = parse_config(json.loads(out))
    assert again == cfg.with_overrides(master_seed=5)
    assert again.w_opt[0] == 1 + 0.5j
    assert json.loads(again.dumps()) == json.loads(out)


def test_bundled_config_matches_experiment():
    cfg = load_config(bundled_config_path())
    assert isinstance(cfg, ExperimentConfig)
    assert cfg.w_opt == (0.227, 0.46, 0.688, 0.46, 0.227)
    assert cfg.mu == (0.1, 0.01)
    assert cfg.noise_var == 0.01 and cfg.runs == 100
    assert cfg.input_cov == ("toeplitz_alpha", 0.5)
    R = cfg.covariance().matrix
    assert R[0, 2] == 0.25


def test_scenarios_reject_bad_walk(tmp_path):
    bad = dict(SMALL, scenario=dict(SMALL["scenario"], walk_cov={"scaled_identity": -1.0}))
    with pytest.raises(ValidationError):
        parse_config(bad)


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "nlmsmoments", "--help"], capture_output=True, text=True)
    assert res.returncode == 0
    assert "predict" in res.stdout and "stability" in res.stdout
