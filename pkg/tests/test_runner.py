"""Runner outputs: determinism, formats, file layout."""

import json
import os

import numpy as np
import pytest

from sparselab.config import parse_config
from sparselab.runner import (
    OUT_DIR_ENV,
    records_to_csv,
    records_to_json,
    resolve_out_dir,
    run_experiment,
    write_outputs,
)


def _cfg(**kw):
    base = {"experiment": "square-sv", "N": 20, "trials": 10, "seed": 3}
    base.update(kw)
    return parse_config(base)


def test_csv_header_and_shape():
    res = run_experiment(_cfg())
    csv = records_to_csv(res.records)
    lines = csv.strip().split("\n")
    assert lines[0] == "experiment,N,n,trial,statistic,value,seed"
    assert len(lines) == 1 + 2 * 10  # two statistics per trial
    first = lines[1].split(",")
    assert first[0] == "square-sv"
    assert first[1] == "20" and first[2] == "20"
    assert first[6] == "3"


def test_csv_values_round_trip_exactly():
    res = run_experiment(_cfg())
    csv = records_to_csv(res.records)
    for line, rec in zip(csv.strip().split("\n")[1:], res.records):
        assert float(line.split(",")[5]) == rec.value  # 17 digits: lossless


def test_rerun_and_worker_count_are_byte_identical():
    a = records_to_csv(run_experiment(_cfg()).records)
    b = records_to_csv(run_experiment(_cfg()).records)
    c = records_to_csv(run_experiment(_cfg(workers=4)).records)
    assert a == b == c


def test_different_seed_changes_output():
    a = records_to_csv(run_experiment(_cfg()).records)
    b = records_to_csv(run_experiment(_cfg(seed=4)).records)
    assert a != b


def test_summary_json_is_deterministic_and_config_echoing():
    r1 = run_experiment(_cfg())
    r2 = run_experiment(_cfg())
    assert r1.summary_json() == r2.summary_json()
    doc = json.loads(r1.summary_json())
    assert doc["experiment"] == "square-sv"
    assert doc["config"]["N"] == 20
    assert doc["config"]["seed"] == 3
    assert "median" in doc["summary"]["scaled_smin"]


def test_records_json_matches_records():
    res = run_experiment(_cfg(trials=3))
    docs = json.loads(records_to_json(res.records))
    assert len(docs) == len(res.records)
    assert docs[0]["statistic"] == res.records[0].statistic
    assert docs[0]["value"] == res.records[0].value


def test_write_outputs_both(tmp_path):
    res = run_experiment(_cfg())
    paths = write_outputs(res, tmp_path)
    names = sorted(p.name for p in paths)
    assert names == [
        "square-sv_samples.csv",
        "square-sv_samples.json",
        "square-sv_summary.json",
        "square-sv_summary.txt",
    ]
    assert (tmp_path / "square-sv_summary.txt").read_text().startswith("square-sv:")


def test_write_outputs_csv_only(tmp_path):
    res = run_experiment(_cfg(format="csv"))
    paths = write_outputs(res, tmp_path)
    names = sorted(p.name for p in paths)
    assert "square-sv_samples.csv" in names
    assert "square-sv_samples.json" not in names
    assert "square-sv_summary.json" in names  # summary always written


def test_write_outputs_json_only(tmp_path):
    res = run_experiment(_cfg(format="json"))
    names = sorted(p.name for p in write_outputs(res, tmp_path))
    assert "square-sv_samples.csv" not in names
    assert "square-sv_samples.json" in names


def test_extra_files_written(tmp_path):
    cfg = parse_config(
        {"experiment": "l1-recovery", "N": 24, "n": 12, "s": 2, "trials": 4}
    )
    res = run_experiment(cfg)
    write_outputs(res, tmp_path)
    rec = (tmp_path / "l1-recovery_recovery.csv").read_text().strip().split("\n")
    assert rec[0] == "trial,s,success,rel_error,solver_iterations"
    assert len(rec) == 1 + 4
    row = rec[1].split(",")
    assert row[0] == "0" and row[1] == "2" and row[2] in ("0", "1")


def test_net_outputs(tmp_path):
    cfg = parse_config(
        {"experiment": "net-bounds", "N": 2, "eps": 0.5, "probes": 300, "net_candidates": 500}
    )
    res = run_experiment(cfg)
    write_outputs(res, tmp_path)
    net_lines = (tmp_path / "net-bounds_net.csv").read_text().strip().split("\n")
    assert net_lines[0] == "x0,x1"
    pts = np.array([[float(v) for v in ln.split(",")] for ln in net_lines[1:]])
    assert np.allclose(np.linalg.norm(pts, axis=1), 1.0, atol=1e-12)
    doc = json.loads((tmp_path / "net-bounds_summary.json").read_text())
    assert doc["summary"]["size"] == pts.shape[0]
    assert doc["summary"]["coverage"]["ok"] is True


def test_out_dir_resolution(tmp_path, monkeypatch):
    cfg = _cfg()
    monkeypatch.delenv(OUT_DIR_ENV, raising=False)
    assert resolve_out_dir(cfg) == resolve_out_dir(cfg, None)
    assert str(resolve_out_dir(cfg)) == "."
    monkeypatch.setenv(OUT_DIR_ENV, str(tmp_path / "envdir"))
    assert resolve_out_dir(cfg) == tmp_path / "envdir"
    cfg2 = _cfg(out=str(tmp_path / "cfgdir"))
    assert resolve_out_dir(cfg2) == tmp_path / "cfgdir"
    assert resolve_out_dir(cfg2, tmp_path / "explicit") == tmp_path / "explicit"


def test_ric_exact_runner_reports(tmp_path):
    cfg = parse_config(
        {
            "experiment": "ric-exact",
            "N": 12,
            "n": 10,
            "s": 3,
            "seed": 2,
            "ensemble": {"normalization": "inv-sqrt-rows"},
        }
    )
    res = run_experiment(cfg)
    write_outputs(res, tmp_path)
    doc = json.loads((tmp_path / "ric-exact_summary.json").read_text())
    deltas = [r["delta_s"] for r in doc["summary"]["reports"]]
    assert deltas == sorted(deltas)  # monotone in order
    report = json.loads((tmp_path / "ric-exact_report.json").read_text())
    assert report["s"] == 3
    assert set(report) >= {"s", "delta_s", "worst_support", "method", "matrix_checksum"}


def test_decomposition_runner_summary():
    cfg = parse_config({"experiment": "decomposition", "N": 60, "trials": 40, "seed": 1})
    res = run_experiment(cfg)
    summary = res.summary
    assert summary["s"] == 6
    assert 0.0 <= summary["fraction_compressible"] <= 1.0
    assert summary["profile"]["nu"] > 0.0
    stats = [r.statistic for r in res.records]
    assert stats.count("sparse_distance") == 40
    assert stats.count("spread_count") == 40
