"""Suite runner: all (method, replicate) pairs of a config, with file output.

Output directory contents:

* ``trajectories.csv``  method, replicate, agent, iteration, best_so_far, y
* ``weights.csv``       method, replicate, iteration, i, j, s_ij, w_ij
* ``agents.csv``        per-run evaluations used vs budget and best found
* ``summary.csv``       per-method AUC and final-regret aggregates
* ``failures.csv``      replicates that raised, with the error message
* ``manifest.json``     resolved config, config hash, seeds, package version

Floats are serialized with 17 significant digits, so parsing a CSV back
recovers the exact binary values and rerunning a suite from its manifest
reproduces every file byte-for-byte. All writes are atomic
(temp-then-rename). Failed replicates are recorded, excluded from
aggregates, and counted in the summary.
"""

from __future__ import annotations

import csv
import hashlib
import json
import os
import tempfile
import traceback
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from . import __version__
from .benchmarks import build_agents
from .metrics import auc_window, early_auc, final_regret
from .orchestrator import RUNNERS, RunRecord
from .problems import AgentSpec, ConfigError, ExperimentConfig, validate_experiment

TRAJECTORIES = "trajectories.csv"
WEIGHTS = "weights.csv"
AGENTS = "agents.csv"
SUMMARY = "summary.csv"
FAILURES = "failures.csv"
MANIFEST = "manifest.json"


def fmt(value: float) -> str:
    """17 significant digits: enough for exact float64 round trips."""
    return format(float(value), ".17g")


def config_hash(config: ExperimentConfig) -> str:
    canonical = json.dumps(config.to_dict(), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode()).hexdigest()


@dataclass
class SuiteResult:
    config: ExperimentConfig
    agents: list[AgentSpec]
    records: dict[str, list[RunRecord]]          # method -> successful runs
    failures: list[tuple[str, int, str]]         # (method, seed, error)
    summary_rows: list[dict] = field(default_factory=list)
    out_dir: Path | None = None


def run_batch(
    config: ExperimentConfig, method: str, agents: Sequence[AgentSpec] | None = None
) -> list[RunRecord]:
    """All replicates of one method, in seed order (no file output)."""
    if agents is None:
        agents = build_agents(config)
    runner = RUNNERS[method]
    return [runner(config, agents, seed) for seed in config.seeds]


def _replicate_task(args: tuple[dict, str, int]):
    raw, method, seed = args
    config = ExperimentConfig.from_dict(raw)
    agents = build_agents(config)
    try:
        record = RUNNERS[method](config, agents, seed)
        return method, seed, record, None
    except Exception:
        return method, seed, None, traceback.format_exc(limit=8)


def run_suite(
    config: ExperimentConfig, out_dir, jobs: int = 1
) -> SuiteResult:
    """Run every (method, replicate) pair and write the output files."""
    config = validate_experiment(config)
    agents = build_agents(config)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)

    tasks = [
        (config.to_dict(), method, seed)
        for method in config.methods
        for seed in config.seeds
    ]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            outcomes = list(pool.map(_replicate_task, tasks))
    else:
        outcomes = [_replicate_task(task) for task in tasks]

    records: dict[str, list[RunRecord]] = {m: [] for m in config.methods}
    failures: list[tuple[str, int, str]] = []
    for method, seed, record, error in outcomes:
        if error is None:
            records[method].append(record)
        else:
            failures.append((method, seed, error))
    # map order is deterministic; keep replicates sorted by seed order anyway
    seed_rank = {seed: i for i, seed in enumerate(config.seeds)}
    for method in records:
        records[method].sort(key=lambda r: seed_rank[r.seed])

    result = SuiteResult(
        config=config, agents=agents, records=records, failures=failures,
        out_dir=out,
    )
    result.summary_rows = summarize(
        {m: [r.best_so_far for r in rs] for m, rs in records.items()},
        agents,
        list(config.methods),
        {m: sum(1 for f in failures if f[0] == m) for m in config.methods},
    )

    _write_atomic(out / TRAJECTORIES, _trajectories_text(result))
    _write_atomic(out / WEIGHTS, _weights_text(result))
    _write_atomic(out / AGENTS, _agents_text(result))
    _write_atomic(out / SUMMARY, summary_text(result.summary_rows))
    _write_atomic(out / FAILURES, _failures_text(result))
    _write_atomic(out / MANIFEST, manifest_text(config))
    return result


def summarize(
    best_by_method: dict[str, list[np.ndarray]],
    agents: Sequence[AgentSpec],
    methods: list[str],
    failure_counts: dict[str, int] | None = None,
) -> list[dict]:
    rows = []
    for method in methods:
        matrices = best_by_method.get(method, [])
        if not matrices:
            continue
        horizon = matrices[0].shape[1] - 1
        auc = early_auc(matrices, agents)
        regret = final_regret(matrices, agents)
        rows.append(
            {
                "method": method,
                "replicates": len(matrices),
                "failures": (failure_counts or {}).get(method, 0),
                "auc_window": auc_window(horizon),
                "auc_mean": auc.mean,
                "auc_std": auc.std,
                "regret_mean": regret.mean,
                "regret_std": regret.std,
            }
        )
    return rows


# --- file rendering ----------------------------------------------------------

def _write_atomic(path: Path, text: str) -> None:
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name + ".")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as handle:
            handle.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _csv_text(header: list[str], rows) -> str:
    import io

    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buffer.getvalue()


def _trajectories_text(result: SuiteResult) -> str:
    rows = []
    for method in result.config.methods:
        for record in result.records[method]:
            observed = {}
            for step in record.steps:
                for i, y in step.observations.items():
                    observed[(i, step.t + 1)] = y
            k, cols = record.best_so_far.shape
            for agent in range(k):
                for it in range(cols):
                    y = observed.get((agent, it))
                    rows.append(
                        (
                            method,
                            record.seed,
                            agent,
                            it,
                            fmt(record.best_so_far[agent, it]),
                            "" if y is None else fmt(y),
                        )
                    )
    return _csv_text(
        ["method", "replicate", "agent", "iteration", "best_so_far", "y"], rows
    )


def _weights_text(result: SuiteResult) -> str:
    rows = []
    for method in result.config.methods:
        for record in result.records[method]:
            for step in record.steps:
                if step.weights is None:
                    continue
                for a, i in enumerate(step.active):
                    for b, j in enumerate(step.active):
                        s = "" if step.similarity is None else fmt(step.similarity[a, b])
                        rows.append(
                            (method, record.seed, step.t, i, j, s,
                             fmt(step.weights[a, b]))
                        )
    return _csv_text(
        ["method", "replicate", "iteration", "i", "j", "s_ij", "w_ij"], rows
    )


def _agents_text(result: SuiteResult) -> str:
    rows = []
    for method in result.config.methods:
        for record in result.records[method]:
            for agent in range(record.best_so_far.shape[0]):
                rows.append(
                    (
                        method,
                        record.seed,
                        agent,
                        record.budgets[agent],
                        record.evaluations_used[agent],
                        fmt(record.best_so_far[agent, -1]),
                    )
                )
    return _csv_text(
        ["method", "replicate", "agent", "budget", "evaluations_used", "best_found"],
        rows,
    )


def summary_text(rows: list[dict]) -> str:
    out_rows = [
        (
            r["method"],
            r["replicates"],
            r["failures"],
            r["auc_window"],
            fmt(r["auc_mean"]),
            fmt(r["auc_std"]),
            fmt(r["regret_mean"]),
            fmt(r["regret_std"]),
        )
        for r in rows
    ]
    return _csv_text(
        [
            "method", "replicates", "failures", "auc_window",
            "auc_mean", "auc_std", "regret_mean", "regret_std",
        ],
        out_rows,
    )


def _failures_text(result: SuiteResult) -> str:
    rows = [
        (method, seed, error.strip().splitlines()[-1])
        for method, seed, error in result.failures
    ]
    return _csv_text(["method", "replicate", "error"], rows)


def manifest_text(config: ExperimentConfig) -> str:
    manifest = {
        "name": config.name,
        "package_version": __version__,
        "config_hash": config_hash(config),
        "config": config.to_dict(),
    }
    return json.dumps(manifest, indent=1, sort_keys=True) + "\n"


def load_manifest(path) -> ExperimentConfig:
    raw = json.loads(Path(path).read_text())
    if "config" not in raw:
        raise ConfigError(f"{path} is not a run manifest")
    config = ExperimentConfig.from_dict(raw["config"])
    if "config_hash" in raw and config_hash(config) != raw["config_hash"]:
        raise ConfigError(f"{path}: config hash mismatch; manifest was edited")
    return config


# --- metrics recomputation from CSVs ------------------------------------------

def load_best_matrices(out_dir) -> dict[str, list[np.ndarray]]:
    """Rebuild per-replicate best-so-far matrices from trajectories.csv."""
    path = Path(out_dir) / TRAJECTORIES
    cells: dict[tuple[str, int], dict[tuple[int, int], float]] = {}
    order: list[tuple[str, int]] = []
    with path.open(newline="", encoding="utf-8") as handle:
        for row in csv.DictReader(handle):
            key = (row["method"], int(row["replicate"]))
            if key not in cells:
                cells[key] = {}
                order.append(key)
            cells[key][(int(row["agent"]), int(row["iteration"]))] = float(
                row["best_so_far"]
            )
    out: dict[str, list[np.ndarray]] = {}
    for key in order:
        method, _ = key
        data = cells[key]
        k = 1 + max(agent for agent, _ in data)
        cols = 1 + max(it for _, it in data)
        best = np.empty((k, cols))
        for (agent, it), value in data.items():
            best[agent, it] = value
        out.setdefault(method, []).append(best)
    return out


def recompute_summary(out_dir) -> list[dict]:
    """Recompute summary rows from the CSVs and manifest in ``out_dir``."""
    out = Path(out_dir)
    config = load_manifest(out / MANIFEST)
    config = validate_experiment(config)
    agents = build_agents(config)
    best = load_best_matrices(out)
    failure_counts: dict[str, int] = {m: 0 for m in config.methods}
    failures_path = out / FAILURES
    if failures_path.exists():
        with failures_path.open(newline="", encoding="utf-8") as handle:
            for row in csv.DictReader(handle):
                failure_counts[row["method"]] = failure_counts.get(row["method"], 0) + 1
    return summarize(best, agents, list(config.methods), failure_counts)


def write_summary(out_dir, rows: list[dict]) -> Path:
    path = Path(out_dir) / SUMMARY
    _write_atomic(path, summary_text(rows))
    return path
