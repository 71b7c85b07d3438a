"""CLI behavior: flags, files, exit codes, and the thin-client mode."""

import json

import httpx
import pytest
from fastapi.testclient import TestClient

from sparselab.cli import main
from sparselab.runner import OUT_DIR_ENV
from sparselab.service import create_app


def test_local_run_writes_files(tmp_path, capsys):
    code = main(
        [
            "--experiment", "square-sv",
            "--N", "15",
            "--trials", "4",
            "--seed", "2",
            "--out", str(tmp_path),
        ]
    )
    assert code == 0
    out = capsys.readouterr().out
    assert "square-sv:" in out
    assert (tmp_path / "square-sv_samples.csv").exists()
    assert (tmp_path / "square-sv_summary.json").exists()
    assert (tmp_path / "square-sv_summary.txt").exists()


def test_env_var_out_dir(tmp_path, monkeypatch):
    monkeypatch.setenv(OUT_DIR_ENV, str(tmp_path / "from-env"))
    code = main(["--experiment", "square-sv", "--N", "10", "--trials", "2"])
    assert code == 0
    assert (tmp_path / "from-env" / "square-sv_samples.csv").exists()


def test_config_file_with_flag_overrides(tmp_path):
    cfg = tmp_path / "run.json"
    cfg.write_text(
        json.dumps(
            {"experiment": "square-sv", "N": 12, "trials": 3, "seed": 1, "out": str(tmp_path)}
        )
    )
    code = main(["--config", str(cfg), "--trials", "5", "--format", "csv"])
    assert code == 0
    csv = (tmp_path / "square-sv_samples.csv").read_text()
    assert csv.count("\n") == 1 + 2 * 5  # override took effect
    assert not (tmp_path / "square-sv_samples.json").exists()


def test_missing_experiment_is_config_error(tmp_path, capsys):
    assert main(["--N", "10"]) == 2
    err = json.loads(capsys.readouterr().err)
    assert err["error"]["exit_code"] == 2


def test_invalid_field_exits_2(tmp_path, capsys):
    code = main(["--experiment", "rect-sv", "--N", "10", "--n", "40", "--out", str(tmp_path)])
    assert code == 2
    err = json.loads(capsys.readouterr().err)
    assert err["error"]["type"] == "ConfigError"


def test_budget_exit_3(tmp_path, capsys):
    code = main(
        [
            "--experiment", "net-bounds",
            "--N", "64", "--s", "12", "--eps", "0.5",
            "--out", str(tmp_path),
        ]
    )
    assert code == 3
    err = json.loads(capsys.readouterr().err)
    assert err["error"]["type"] == "BudgetExceededError"


def test_unreadable_config_exits_2(tmp_path, capsys):
    assert main(["--config", str(tmp_path / "nope.json")]) == 2
    capsys.readouterr()


def test_malformed_config_json_exits_2(tmp_path, capsys):
    p = tmp_path / "broken.json"
    p.write_text("{not json")
    assert main(["--config", str(p)]) == 2
    capsys.readouterr()


@pytest.fixture()
def fake_server(monkeypatch):
    """Route the CLI's HTTP calls into an in-process app instance."""
    client = TestClient(create_app())

    def fake_post(url, json=None, timeout=None):
        path = url.split("://", 1)[1]
        path = path[path.index("/"):]
        return client.post(path, json=json)

    monkeypatch.setattr(httpx, "post", fake_post)
    return client


def test_server_mode_files_match_local_run(tmp_path, fake_server, capsys):
    local_dir = tmp_path / "local"
    remote_dir = tmp_path / "remote"
    args = ["--experiment", "l1-recovery", "--N", "24", "--n", "12", "--s", "2", "--trials", "3"]
    assert main(args + ["--out", str(local_dir)]) == 0
    assert main(args + ["--out", str(remote_dir), "--server", "http://sparselab.test"]) == 0
    capsys.readouterr()
    for name in (
        "l1-recovery_samples.csv",
        "l1-recovery_summary.txt",
        "l1-recovery_recovery.csv",
    ):
        assert (remote_dir / name).read_bytes() == (local_dir / name).read_bytes()


def test_server_mode_propagates_exit_codes(tmp_path, fake_server, capsys):
    code = main(
        [
            "--experiment", "ric-exact",
            "--N", "40", "--n", "10", "--s", "12",
            "--out", str(tmp_path),
            "--server", "http://sparselab.test",
        ]
    )
    assert code == 3
    err = json.loads(capsys.readouterr().err)
    assert err["error"]["exit_code"] == 3
