"""Suite execution, delimited outputs, manifest, and reproducibility."""

import json

import numpy as np
import pytest

from cobo import suite
from cobo.problems import ConfigError, ExperimentConfig
from cobo.suite import (
    AGENTS,
    FAILURES,
    MANIFEST,
    SUMMARY,
    TRAJECTORIES,
    WEIGHTS,
    config_hash,
    fmt,
    load_best_matrices,
    load_manifest,
    recompute_summary,
    run_batch,
    run_suite,
    summary_text,
)

ALL_FILES = (TRAJECTORIES, WEIGHTS, AGENTS, SUMMARY, FAILURES, MANIFEST)


def tiny_config(**kw):
    base = dict(
        name="tiny",
        benchmark="sasena",
        methods=("arco", "separate"),
        seeds=(0, 1),
        iterations=3,
        candidates_per_dim=16,
        grid_multiplier=5,
    )
    base.update(kw)
    return ExperimentConfig(**base)


def test_fmt_round_trips_floats_exactly():
    values = [0.1, 1.0 / 3.0, 1e-17, 123456.789, np.float64(np.pi), 6.782]
    for v in values:
        assert float(fmt(v)) == float(v)
    assert fmt(1.0) == "1"


def test_config_hash_tracks_content():
    a = tiny_config()
    b = tiny_config(seeds=(0, 2))
    assert config_hash(a) != config_hash(b)
    assert config_hash(a) == config_hash(tiny_config())


def test_run_batch_orders_records_by_seed():
    records = run_batch(tiny_config(), "separate")
    assert [r.seed for r in records] == [0, 1]
    assert all(r.method == "separate" for r in records)


def test_suite_writes_complete_file_set(tmp_path):
    out = tmp_path / "suite"
    result = run_suite(tiny_config(), out)
    for name in ALL_FILES:
        assert (out / name).exists(), name
    summary = (out / SUMMARY).read_text().splitlines()
    assert summary[0].startswith("method,")
    assert len(summary) == 3  # header + one row per method
    assert result.failures == []
    assert [row["method"] for row in result.summary_rows] == ["arco", "separate"]


def test_trajectories_hold_observations_only_at_their_step(tmp_path):
    out = tmp_path / "suite"
    run_suite(tiny_config(methods=("separate",), seeds=(0,)), out)
    rows = (out / TRAJECTORIES).read_text().splitlines()
    header = rows[0].split(",")
    assert header == [
        "method", "replicate", "agent", "iteration", "best_so_far", "y",
    ]
    col_iter = header.index("iteration")
    col_y = header.index("y")
    for row in rows[1:]:
        parts = row.split(",")
        if parts[col_iter] == "0":
            assert parts[col_y] == ""  # init column aggregates several points
        else:
            assert parts[col_y] != ""


def test_manifest_records_resolved_config_and_hash(tmp_path):
    out = tmp_path / "suite"
    run_suite(tiny_config(), out)
    manifest = json.loads((out / MANIFEST).read_text())
    assert manifest["name"] == "tiny"
    assert manifest["config"]["iterations"] == 3
    assert manifest["config"]["lengthscale"] == 0.05  # family default resolved
    config = load_manifest(out / MANIFEST)
    assert config.lengthscale == 0.05
    assert manifest["config_hash"] == config_hash(config)


def test_manifest_rerun_reproduces_every_file_bit_exactly(tmp_path):
    first = tmp_path / "first"
    second = tmp_path / "second"
    run_suite(tiny_config(), first)
    rerun_config = load_manifest(first / MANIFEST)
    run_suite(rerun_config, second)
    for name in ALL_FILES:
        assert (first / name).read_bytes() == (second / name).read_bytes(), name


def test_tampered_manifest_is_rejected(tmp_path):
    out = tmp_path / "suite"
    run_suite(tiny_config(), out)
    manifest = json.loads((out / MANIFEST).read_text())
    manifest["config"]["iterations"] = 9
    (out / MANIFEST).write_text(json.dumps(manifest))
    with pytest.raises(ConfigError, match="hash"):
        load_manifest(out / MANIFEST)


def test_best_matrices_rebuild_exactly_from_csv(tmp_path):
    out = tmp_path / "suite"
    result = run_suite(tiny_config(), out)
    rebuilt = load_best_matrices(out)
    assert set(rebuilt) == {"arco", "separate"}
    for method, records in result.records.items():
        assert len(rebuilt[method]) == len(records)
        for record, matrix in zip(records, rebuilt[method]):
            np.testing.assert_array_equal(record.best_so_far, matrix)


def test_recomputed_summary_matches_written_summary(tmp_path):
    out = tmp_path / "suite"
    run_suite(tiny_config(), out)
    recomputed = recompute_summary(out)
    assert summary_text(recomputed) == (out / SUMMARY).read_text()


def test_runner_failures_are_recorded_not_fatal(tmp_path, monkeypatch):
    real = suite.RUNNERS["separate"]

    def flaky(config, agents, seed, initial=None):
        if seed == 1:
            raise RuntimeError("synthetic failure")
        return real(config, agents, seed, initial)

    monkeypatch.setitem(suite.RUNNERS, "separate", flaky)
    out = tmp_path / "suite"
    result = run_suite(tiny_config(methods=("separate",)), out)
    assert len(result.records["separate"]) == 1
    assert len(result.failures) == 1
    method, seed, message = result.failures[0]
    assert (method, seed) == ("separate", 1)
    assert "synthetic failure" in message
    failures = (out / FAILURES).read_text().splitlines()
    assert len(failures) == 2  # header + the one failure
    assert "synthetic failure" in failures[1]
    summary_row = (out / SUMMARY).read_text().splitlines()[1].split(",")
    assert summary_row[1] == "1"  # replicates that succeeded
    assert summary_row[2] == "1"  # failures


def test_parallel_jobs_match_serial_output(tmp_path):
    serial = tmp_path / "serial"
    parallel = tmp_path / "parallel"
    config = tiny_config(methods=("separate",), seeds=(0, 1, 2))
    run_suite(config, serial)
    run_suite(config, parallel, jobs=2)
    for name in (TRAJECTORIES, SUMMARY):
        assert (serial / name).read_bytes() == (parallel / name).read_bytes()
