"""Acceptance gate: the headline benchmark claims at full desk scale.

Each test prints one [PASS]/[FAIL] line with the measured values before
asserting, so a run of this module doubles as the scoreboard. The heavy
suites (50 replicates for the low-dimensional families, 20 for the
high-dimensional ones) run once per session through module-scoped fixtures
that read the shipped config files.
"""

import time
from pathlib import Path

import numpy as np
import pytest

from cobo import benchmarks as bm
from cobo.acquisition import expected_improvement
from cobo.consensus import apply_consensus, baseline_weights, sinkhorn
from cobo.metrics import early_auc, final_regret
from cobo.orchestrator import run_arco, run_separate, run_uniform_cbo
from cobo.problems import (
    AgentSpec,
    Bounds,
    ExperimentConfig,
    InputLayout,
    load_config,
    validate_experiment,
)
from cobo.scheduler import active_set, init_schedule, record_evaluation
from cobo.suite import (
    AGENTS,
    FAILURES,
    MANIFEST,
    SUMMARY,
    TRAJECTORIES,
    WEIGHTS,
    load_manifest,
    run_batch,
    run_suite,
)
from cobo.surrogate import KernelParams, fit, predict_batch

CONFIG_DIR = Path(__file__).resolve().parent.parent / "configs"


def report(capsys, criterion, ok, detail):
    with capsys.disabled():
        print(f"\n[{'PASS' if ok else 'FAIL'}] {criterion}: {detail}")


def batch(config_name):
    config = validate_experiment(load_config(CONFIG_DIR / config_name))
    agents = bm.build_agents(config)
    best = {
        method: [r.best_so_far for r in run_batch(config, method, agents)]
        for method in config.methods
    }
    return agents, best


@pytest.fixture(scope="module")
def sasena_suite():
    start = time.perf_counter()
    agents, best = batch("sasena.yaml")
    return agents, best, time.perf_counter() - start


@pytest.fixture(scope="module")
def ackley1_suite():
    return batch("ackley1.yaml")


@pytest.fixture(scope="module")
def ackley2_suite():
    return batch("ackley2.yaml")


@pytest.fixture(scope="module")
def ackley3_suite():
    return batch("ackley3.yaml")


@pytest.fixture(scope="module")
def borehole_suite():
    return batch("borehole.yaml")


@pytest.fixture(scope="module")
def wingweight_suite():
    return batch("wingweight.yaml")


def test_criterion_1_sasena_regret_separation(sasena_suite, capsys):
    agents, best, elapsed = sasena_suite
    arco = final_regret(best["arco"], agents).mean
    sep = final_regret(best["separate"], agents).mean
    uniform = final_regret(best["uniform_cbo"], agents).mean
    ok = (
        arco <= 0.01
        and sep <= 0.01
        and uniform >= 0.02
        and uniform >= 2.0 * arco
        and elapsed < 300.0
    )
    report(
        capsys, "C1 sasena",
        ok,
        f"regret arco={arco:.6f} separate={sep:.6f} uniform={uniform:.6f} "
        f"({elapsed:.0f}s for 150 runs)",
    )
    assert ok


def test_criterion_2_ackley_scenario1(ackley1_suite, capsys):
    agents, best = ackley1_suite
    arco_regret = final_regret(best["arco"], agents).mean
    uniform_regret = final_regret(best["uniform_cbo"], agents).mean
    arco_auc = early_auc(best["arco"], agents).mean
    sep_auc = early_auc(best["separate"], agents).mean
    halved = arco_regret < uniform_regret / 2.0
    auc_ok = arco_auc <= sep_auc
    report(
        capsys, "C2 ackley s1",
        halved and auc_ok,
        f"regret arco={arco_regret:.4f} vs uniform/2={uniform_regret / 2:.4f}; "
        f"auc arco={arco_auc:.4f} vs separate={sep_auc:.4f}",
    )
    assert halved and auc_ok


def test_criterion_3_ackley_scenario2(ackley2_suite, capsys):
    agents, best = ackley2_suite
    arco_auc = early_auc(best["arco"], agents).mean
    sep_auc = early_auc(best["separate"], agents).mean
    arco_regret = final_regret(best["arco"], agents).mean
    sep_regret = final_regret(best["separate"], agents).mean
    auc_ok = arco_auc <= sep_auc - 0.03
    regret_ok = arco_regret <= sep_regret + 0.005
    report(
        capsys, "C3 ackley s2",
        auc_ok and regret_ok,
        f"auc arco={arco_auc:.4f} vs separate-0.03={sep_auc - 0.03:.4f}; "
        f"regret arco={arco_regret:.4f} vs separate+0.005={sep_regret + 0.005:.4f}",
    )
    assert auc_ok and regret_ok


def test_criterion_4_ackley_scenario3(ackley3_suite, capsys):
    agents, best = ackley3_suite
    arco_auc = early_auc(best["arco"], agents).mean
    sep_auc = early_auc(best["separate"], agents).mean
    ok = arco_auc <= sep_auc - 0.03
    report(
        capsys, "C4 ackley s3",
        ok,
        f"auc arco={arco_auc:.4f} vs separate-0.03={sep_auc - 0.03:.4f}",
    )
    assert ok


def test_criterion_5_borehole(borehole_suite, capsys):
    agents, best = borehole_suite
    arco = final_regret(best["arco"], agents).mean
    sep = final_regret(best["separate"], agents).mean
    ok = arco <= sep and arco <= 0.01 and sep <= 0.01
    report(
        capsys, "C5 borehole",
        ok,
        f"regret arco={arco:.6f} separate={sep:.6f} (both must be <= 0.01)",
    )
    assert ok


def test_criterion_6_wingweight(wingweight_suite, capsys):
    agents, best = wingweight_suite
    arco = final_regret(best["arco"], agents).mean
    sep = final_regret(best["separate"], agents).mean
    ok = arco <= 0.01 and arco <= sep / 2.0
    report(
        capsys, "C6 wingweight",
        ok,
        f"regret arco={arco:.6f} vs cap 0.01 and separate/2={sep / 2:.6f}",
    )
    assert ok


def test_criterion_7_property_suite(capsys):
    start = time.perf_counter()
    rng = np.random.default_rng(2024)
    problems = []

    # every consensus matrix emitted by real runs is doubly stochastic
    small = ExperimentConfig(
        name="props", benchmark="ackley", scenario=2, iterations=8,
        candidates_per_dim=32, grid_multiplier=5,
    )
    agents = bm.benchmark_agents("ackley", scenario=2)
    runs = [
        run_arco(small, agents, seed=0),
        run_uniform_cbo(small, agents, seed=0),
    ]
    for record in runs:
        for step in record.steps:
            if step.weights is None:
                problems.append(f"{record.method} t={step.t}: no weights recorded")
                continue
            residual = max(
                np.abs(step.weights.sum(axis=0) - 1.0).max(),
                np.abs(step.weights.sum(axis=1) - 1.0).max(),
            )
            if residual > 1e-6:
                problems.append(
                    f"{record.method} t={step.t}: weight residual {residual:.2e}"
                )

    # private coordinates of evaluated inputs match the raw proposals
    s3 = ExperimentConfig(
        name="props3", benchmark="ackley", scenario=3, iterations=6,
        candidates_per_dim=32, grid_multiplier=5,
    )
    s3_agents = bm.benchmark_agents("ackley", scenario=3)
    for record in (run_arco(s3, s3_agents, seed=1),):
        for step in record.steps:
            for i in step.active:
                private = list(s3_agents[i].layout.private_dims)
                if not np.array_equal(
                    step.inputs[i][private], step.proposals[i][private]
                ):
                    problems.append(f"arco s3 t={step.t}: private coords changed")

    # uniform baseline reaches the identity exactly at the horizon
    for k, horizon in ((2, 10), (5, 50), (6, 25)):
        if not np.array_equal(baseline_weights(horizon, horizon, k), np.eye(k)):
            problems.append(f"baseline_weights({horizon},{horizon},{k}) != I")

    # closed-form EI within 3 standard errors of Monte Carlo, 20 cases
    for case in range(20):
        mean = float(rng.uniform(-2.0, 2.0))
        std = float(rng.uniform(0.05, 1.5))
        f_star = float(rng.uniform(-2.0, 2.0))
        draws = np.random.default_rng(case).normal(mean, std, size=120_000)
        u = np.maximum(0.0, f_star - draws)
        se = float(np.std(u, ddof=1) / np.sqrt(u.size))
        closed = expected_improvement(mean, std, f_star)
        if abs(closed - float(np.mean(u))) > 3.0 * se + 1e-12:
            problems.append(f"EI case {case}: beyond 3 standard errors")

    # GP fit/predict against a dense direct solve for every n <= 20
    for n in range(1, 21):
        d = int(rng.integers(1, 4))
        lower, upper = np.zeros(d), np.ones(d)
        x = rng.uniform(size=(n, d))
        y = rng.normal(size=n)
        params = KernelParams()
        model = fit(x, y, lower, upper, params)
        queries = rng.uniform(size=(5, d))
        pred = predict_batch(model, queries)
        y_std = np.std(y) or 1.0
        yu = (y - np.mean(y)) / y_std
        sq = ((x[:, None, :] - x[None, :, :]) ** 2).sum(-1)
        gram = np.exp(-sq / (2 * params.lengthscale**2)) + model.jitter * np.eye(n)
        ks = np.exp(
            -((queries[:, None, :] - x[None, :, :]) ** 2).sum(-1)
            / (2 * params.lengthscale**2)
        )
        mean_ref = np.mean(y) + y_std * (ks @ np.linalg.solve(gram, yu))
        var_ref = 1.0 - np.einsum(
            "ij,ji->i", ks, np.linalg.solve(gram, ks.T)
        ) + params.noise_variance
        scale = max(1.0, float(np.abs(mean_ref).max()))
        if np.abs(pred.mean - mean_ref).max() > 1e-8 * scale:
            problems.append(f"GP mean mismatch at n={n}")
        if np.abs(pred.variance - np.maximum(var_ref, 1e-12)).max() > 1e-8:
            problems.append(f"GP variance mismatch at n={n}")

    # consensus application preserves per-coordinate means
    mix_agents = [
        AgentSpec(
            id=i,
            objective=lambda v: float(v.sum()),
            bounds=Bounds((0.0, 0.0), (1.0, 1.0)),
            layout=InputLayout((0, 1)),
            budget=3,
            n_init=2,
        )
        for i in range(5)
    ]
    for _ in range(25):
        props = [rng.uniform(size=2) for _ in range(5)]
        w = sinkhorn(rng.uniform(0.05, 2.0, size=(5, 5)))
        mixed = apply_consensus(w, props, mix_agents, active=list(range(5)))
        drift = np.abs(
            np.stack(mixed).mean(axis=0) - np.stack(props).mean(axis=0)
        ).max()
        if drift > 1e-9:
            problems.append(f"consensus mean drift {drift:.2e}")

    # fuzzed schedules never exceed budgets
    for _ in range(200):
        k = int(rng.integers(1, 7))
        budgets = rng.integers(0, 30, size=k)
        if budgets.max() == 0:
            budgets[int(rng.integers(k))] = int(rng.integers(1, 30))
        horizon = int(rng.integers(1, 80))
        sched = init_schedule(budgets)
        for t in range(horizon):
            for i in active_set(sched, t):
                record_evaluation(sched, i)
        if np.any(sched.used > sched.initial):
            problems.append(f"budget exceeded for {budgets.tolist()}")

    elapsed = time.perf_counter() - start
    ok = not problems and elapsed < 30.0
    detail = f"deterministic checks in {elapsed:.1f}s"
    if problems:
        detail += "; " + "; ".join(problems[:4])
    report(capsys, "C7 properties", ok, detail)
    assert ok, problems


def test_criterion_8_oracle_vs_published(capsys):
    cache = bm.load_range_cache()
    entries = cache["agents"]
    confirmed = [e for e in entries if e["within_tolerance"]]
    flagged = [e for e in entries if not e["within_tolerance"]]
    consistent = all(
        (e["gap"] <= e["tolerance"]) == e["within_tolerance"] for e in entries
    )
    # the criterion allows logged discrepancies: each flagged entry must
    # carry the measured gap and the oracle value that replaces the
    # published optimum downstream
    logged = all(
        e["gap"] > e["tolerance"]
        and bm.reference_optimum(e["family"], e["agent"])[0] == e["f_min"]
        for e in flagged
    )
    ok = len(entries) == 18 and consistent and logged
    names = ", ".join(f"{e['family']}:{e['agent']}" for e in flagged) or "none"
    report(
        capsys, "C8 oracle",
        ok,
        f"{len(confirmed)}/18 published optima confirmed within 1%; "
        f"logged discrepancies: {names}",
    )
    assert ok


def test_criterion_9_manifest_rerun_bit_exact(tmp_path, capsys):
    config = load_config(CONFIG_DIR / "sasena.yaml")
    first = tmp_path / "first"
    second = tmp_path / "second"
    run_suite(config, first)
    run_suite(load_manifest(first / MANIFEST), second)
    mismatched = [
        name
        for name in (TRAJECTORIES, WEIGHTS, AGENTS, SUMMARY, FAILURES, MANIFEST)
        if (first / name).read_bytes() != (second / name).read_bytes()
    ]
    ok = not mismatched
    report(
        capsys, "C9 reproducibility",
        ok,
        "manifest rerun reproduced every output file byte-for-byte"
        if ok
        else f"files differ: {mismatched}",
    )
    assert ok
