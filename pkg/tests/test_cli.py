import json

import numpy as np
import pytest

from app.cli import run
from app.model_io import load_model, save_model


@pytest.fixture
def workdir(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    monkeypatch.setenv("CAIMDP_OUTPUT_DIR", str(tmp_path / "output"))
    monkeypatch.setenv("CAIMDP_LOG_LEVEL", "WARNING")
    monkeypatch.setenv("CAIMDP_VALIDATION_SAMPLES", "32")
    return tmp_path


@pytest.fixture
def model_path(workdir, small_linear):
    return save_model(small_linear, workdir / "linear.json")


def _error(stderr: str) -> dict:
    lines = [line for line in stderr.splitlines() if line.startswith("{")]
    assert lines, stderr
    return json.loads(lines[-1])


def test_gen_then_validate(workdir, capsys):
    assert run(["gen", "--states", "3", "--seed", "4"]) == 0
    path = capsys.readouterr().out.strip()
    assert path == str(workdir / "output" / "caimdp_3_seed4.json")
    assert run(["validate", path]) == 0
    report = json.loads(capsys.readouterr().out)
    assert report["passed"]


def test_zero_horizon_reports_rewards(model_path, small_linear, capsys):
    assert run(["synthesize", str(model_path), "-N", "0", "-g", "1"]) == 0
    report = json.loads(capsys.readouterr().out)
    assert report["values"] == [small_linear.reward.tolist()]
    assert report["policy"] == []


def test_synthesize_writes_policy_that_evaluates_to_v0(model_path, workdir, capsys):
    out, policy = workdir / "report.json", workdir / "policy.json"
    assert run(["synthesize", str(model_path), "-N", "3", "-g", "0.9",
                "--out", str(out), "--policy-out", str(policy)]) == 0
    report = json.loads(out.read_text(encoding="utf-8"))
    capsys.readouterr()
    assert run(["evaluate", str(model_path), str(policy), "--gamma", "0.9"]) == 0
    evaluated = json.loads(capsys.readouterr().out)
    assert np.allclose(evaluated["values"], report["values"][0], atol=1e-9)


def test_reports_are_byte_identical(model_path, capsys):
    argv = ["synthesize", str(model_path), "-N", "3", "-g", "1", "--mode", "optimistic"]
    assert run(argv) == 0
    first = capsys.readouterr().out
    assert run(argv + ["--workers", "2"]) == 0
    assert capsys.readouterr().out == first
    assert "iteration_seconds" not in first


def test_timings_flag(model_path, capsys):
    assert run(["synthesize", str(model_path), "-N", "2", "-g", "1", "--timings"]) == 0
    assert len(json.loads(capsys.readouterr().out)["iteration_seconds"]) == 2


def test_discrete_and_bound(model_path, capsys):
    assert run(["discrete", str(model_path), "-N", "2", "-g", "1", "--actions", "sample:5", "--seed", "3"]) == 0
    assert json.loads(capsys.readouterr().out)["mode"] == "discrete"
    assert run(["bound", str(model_path), str(model_path), "-N", "2", "-g", "1"]) == 0
    bound = json.loads(capsys.readouterr().out)
    assert all(gap >= -1e-6 for gap in bound["gaps"])


def test_discrete_actions_from_file(model_path, workdir, capsys):
    actions = workdir / "actions.json"
    actions.write_text(json.dumps([[0.0, 0.0], [1.0, 1.0]]), encoding="utf-8")
    assert run(["discrete", str(model_path), "-N", "1", "-g", "1", "--actions", str(actions)]) == 0
    capsys.readouterr()
    actions.write_text(json.dumps([[0.0, 0.0], [3.0, 1.0]]), encoding="utf-8")
    assert run(["discrete", str(model_path), "-N", "1", "-g", "1", "--actions", str(actions)]) == 1
    error = _error(capsys.readouterr().err)
    assert error["error"] == "membership_error"
    assert error["index"] == 1
    actions.write_text(json.dumps([[0.5], [0.25]]), encoding="utf-8")
    assert run(["discrete", str(model_path), "-N", "1", "-g", "1", "--actions", str(actions)]) == 1
    assert _error(capsys.readouterr().err)["error"] == "invalid_argument"


def test_policy_of_the_wrong_dimension_is_an_invalid_argument(model_path, workdir, capsys):
    policy = workdir / "policy.json"
    policy.write_text(json.dumps({"horizon": 1, "actions": [[[0.5]] * 4]}), encoding="utf-8")
    assert run(["evaluate", str(model_path), str(policy)]) == 1
    assert _error(capsys.readouterr().err)["error"] == "invalid_argument"
    policy.write_text(json.dumps({"horizon": 1, "actions": [[[0.5, 0.5]] * 3 + [[0.5]]]}), encoding="utf-8")
    assert run(["evaluate", str(model_path), str(policy)]) == 1
    assert _error(capsys.readouterr().err)["error"] == "invalid_argument"


@pytest.mark.parametrize("argv", [
    [],
    ["synthesize"],
    ["synthesize", "model.json", "-g", "1"],
    ["compare", "model.json", "-N", "1", "-g", "1", "--samples", "1,x"],
])
def test_usage_errors_exit_with_two(workdir, argv, capsys):
    assert run(argv) == 2
    error = _error(capsys.readouterr().err)
    assert error["error"] == "usage"
    assert error["message"]


def test_help_exits_cleanly_without_an_error_line(workdir, capsys):
    assert run(["--help"]) == 0
    assert "{" not in capsys.readouterr().err


def test_missing_file_is_an_io_error(workdir, capsys):
    assert run(["validate", str(workdir / "missing.json")]) == 1
    assert _error(capsys.readouterr().err)["error"] == "io_error"


def test_malformed_model_reports_parse_error(workdir, capsys):
    bad = workdir / "bad.json"
    bad.write_text(json.dumps({"n_states": 2, "reward": [1.0]}), encoding="utf-8")
    assert run(["synthesize", str(bad), "-N", "1", "-g", "1"]) == 1
    error = _error(capsys.readouterr().err)
    assert error["error"] == "parse_error"
    assert error["paths"]


def test_invalid_gamma_and_tolerance(model_path, capsys):
    assert run(["synthesize", str(model_path), "-N", "1", "-g", "-1"]) == 1
    assert _error(capsys.readouterr().err)["error"] == "invalid_argument"
    assert run(["synthesize", str(model_path), "-N", "1", "-g", "1", "--tol", "-1"]) == 1
    assert _error(capsys.readouterr().err)["error"] == "invalid_argument"


def test_compare_writes_csv_curves_and_json(workdir, capsys):
    assert run(["gen", "--states", "3", "--seed", "1", "--out", str(workdir / "m.json")]) == 0
    capsys.readouterr()
    out = workdir / "cmp.csv"
    assert run(["compare", str(workdir / "m.json"), "-N", "2", "-g", "1",
                "--samples", "1,2", "--reps", "1", "--out", str(out)]) == 0
    assert out.exists()
    assert (workdir / "cmp_curves.csv").exists()
    assert json.loads((workdir / "cmp.json").read_text(encoding="utf-8"))["ordering_violations"] == 0
    assert load_model(workdir / "m.json").n_states == 3
