"""CLI, config resolution, output schemas, end-to-end reproducibility."""

import json
from pathlib import Path

import pytest

from sqe_lab.cli import main, parse_config_file
from sqe_lab.experiments import (
    EXPERIMENTS,
    ConfigError,
    ExperimentConfig,
    run_experiment,
)

FAST_ARGS = {
    "model-a": ["--total-n", "400"],
    "born": ["--trials", "2000", "--n-sqe", "200"],
    "relax-time": ["--trials", "10"],
    "evolve": ["--grid-size", "256", "--n-sqe", "200"],
    "corr": ["--trials", "1500", "--n-sqe", "200"],
    "chsh": ["--trials", "1500", "--n-sqe", "200"],
    "marginals": ["--trials", "1500", "--n-sqe", "200"],
}

GOLDEN_HEADERS = {
    "model-a": "n_a,n_b,lhs,bound,holds",
    "born": "delta_alpha,trials,freq_plus,born_weight,abs_err,sigma",
    "relax-time": "g_peak,mean_sweeps,sd_sweeps",
    "evolve": "step,alpha,m,flipped,tau_relax,ratio,pure_state_valid",
    "corr": "delta,E,stderr",
    "marginals": "side,own_alpha,remote_beta,trials,p_plus,abs_dev,sigma",
}


def test_config_defaults_resolved():
    cfg = ExperimentConfig(experiment="born")
    assert cfg.trials == 100_000
    assert cfg.n_sqe == 1000
    assert cfg.grid_size == 360
    cfg2 = ExperimentConfig(experiment="relax-time")
    assert cfg2.trials == 100


def test_config_validation():
    with pytest.raises(ConfigError):
        ExperimentConfig(experiment="nope")
    with pytest.raises(ConfigError):
        ExperimentConfig(experiment="born", grid_size=7)
    with pytest.raises(ConfigError):
        ExperimentConfig(experiment="born", trials=0)
    with pytest.raises(ConfigError):
        ExperimentConfig(experiment="born", eta=2.0)


def test_config_file_parsing(tmp_path):
    path = tmp_path / "run.cfg"
    path.write_text("# comment\nseed = 7\ntrials = 50\ngrid-size = 24\n\neps = 1e-4\n")
    overrides = parse_config_file(path)
    assert overrides == {"master_seed": 7, "trials": 50, "grid_size": 24, "eps_eq": 1e-4}


def test_config_file_unknown_key_rejected(tmp_path):
    path = tmp_path / "bad.cfg"
    path.write_text("frobnicate = 3\n")
    with pytest.raises(ConfigError):
        parse_config_file(path)


def test_cli_exit_code_2_on_bad_config(tmp_path, capsys):
    path = tmp_path / "bad.cfg"
    path.write_text("frobnicate = 3\n")
    code = main(["born", "--config", str(path), "--out", str(tmp_path)])
    assert code == 2
    assert "config error" in capsys.readouterr().err
    assert not (tmp_path / "born_summary.json").exists()


def test_cli_flags_override_config_file(tmp_path):
    path = tmp_path / "run.cfg"
    path.write_text("trials = 50\nseed = 7\n")
    out = tmp_path / "out"
    code = main(["model-a", "--config", str(path), "--total-n", "100",
                 "--out", str(out)])
    assert code == 0
    summary = json.loads((out / "model-a_summary.json").read_text())
    assert summary["config"]["master_seed"] == 7
    assert summary["config"]["total_n"] == 100


def test_env_overrides(tmp_path, monkeypatch):
    out = tmp_path / "enviro"
    monkeypatch.setenv("SQE_LAB_SEED", "123")
    monkeypatch.setenv("SQE_LAB_OUT", str(out))
    code = main(["model-a", "--total-n", "60"])
    assert code == 0
    summary = json.loads((out / "model-a_summary.json").read_text())
    assert summary["config"]["master_seed"] == 123


def test_flags_beat_env(tmp_path, monkeypatch):
    monkeypatch.setenv("SQE_LAB_SEED", "123")
    out = tmp_path / "o"
    code = main(["model-a", "--total-n", "60", "--seed", "9", "--out", str(out)])
    assert code == 0
    summary = json.loads((out / "model-a_summary.json").read_text())
    assert summary["config"]["master_seed"] == 9


@pytest.mark.parametrize("experiment", EXPERIMENTS)
def test_every_experiment_runs_and_reruns_identically(experiment, tmp_path):
    args = FAST_ARGS[experiment]
    out1, out2 = tmp_path / "a", tmp_path / "b"
    assert main([experiment, *args, "--out", str(out1)]) == 0
    assert main([experiment, *args, "--out", str(out2)]) == 0
    files1 = sorted(p.name for p in out1.iterdir())
    files2 = sorted(p.name for p in out2.iterdir())
    assert files1 == files2
    for name in files1:
        assert (out1 / name).read_bytes() == (out2 / name).read_bytes(), name


@pytest.mark.parametrize("experiment", [e for e in EXPERIMENTS if e in GOLDEN_HEADERS])
def test_csv_headers_are_schema_stable(experiment, tmp_path):
    assert main([experiment, *FAST_ARGS[experiment], "--out", str(tmp_path)]) == 0
    first_line = (tmp_path / f"{experiment}.csv").read_text().splitlines()[0]
    assert first_line == GOLDEN_HEADERS[experiment]


def test_summary_structure(tmp_path):
    assert main(["born", *FAST_ARGS["born"], "--out", str(tmp_path)]) == 0
    doc = json.loads((tmp_path / "born_summary.json").read_text())
    assert doc["schema_version"] == 1
    assert doc["experiment"] == "born"
    assert doc["generator"]["name"] == "philox4x64"
    assert doc["generator"]["seed_scheme"] == "sha256-path-v1"
    assert doc["passed"] is True
    assert all({"name", "passed"} <= set(c) for c in doc["checks"])
    assert "output_path" not in doc["config"]
    assert "workers" not in doc["config"]


def test_worker_count_does_not_change_bytes(tmp_path):
    outs = {}
    for workers in (1, 3):
        out = tmp_path / f"w{workers}"
        assert main(["marginals", "--trials", "1500", "--n-sqe", "150",
                     "--workers", str(workers), "--out", str(out)]) == 0
        outs[workers] = {p.name: p.read_bytes() for p in out.iterdir()}
    assert outs[1] == outs[3]


def test_corr_emits_plot_reference(tmp_path):
    assert main(["corr", *FAST_ARGS["corr"], "--out", str(tmp_path)]) == 0
    lines = (tmp_path / "corr_plotdata.csv").read_text().splitlines()
    assert lines[0] == "delta,E,neg_cos_delta"
    assert len(lines) == 13  # header + 12 sample points


def test_run_experiment_unknown_rejected():
    with pytest.raises(ConfigError):
        ExperimentConfig(experiment="spectroscopy")


def test_cli_exit_code_1_on_failed_check(tmp_path, capsys):
    # a one-sweep step budget violates the relaxation-time regime, so the
    # chain aborts and the run's check fails
    code = main(["evolve", "--grid-size", "256", "--n-sqe", "150",
                 "--dt-sweeps", "1", "--out", str(tmp_path)])
    assert code == 1
    out = capsys.readouterr().out
    assert "FAIL" in out
    doc = json.loads((tmp_path / "evolve_summary.json").read_text())
    assert doc["passed"] is False


def test_evolve_csv_logs_each_step(tmp_path):
    assert main(["evolve", "--grid-size", "256", "--n-sqe", "150", "--steps", "4",
                 "--mode", "adiabatic", "--out", str(tmp_path)]) == 0
    lines = (tmp_path / "evolve.csv").read_text().splitlines()
    assert len(lines) == 5
    assert lines[1].split(",")[0] == "0"
