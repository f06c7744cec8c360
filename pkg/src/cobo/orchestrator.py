"""Run loops for the three methods over one replicate.

All three methods share the same skeleton: draw initial designs, then at
each global iteration fit a fresh GP per active agent, propose a candidate
by expected improvement, optionally blend the shared coordinates of the
proposals through a consensus weight matrix, evaluate, and append. They
differ only in the weight matrix:

* ``separate``: no mixing (each agent keeps its raw proposal),
* ``uniform_cbo``: the budget-agnostic linear schedule from (1/K) * ones to I,
* ``arco``: similarity-gated weights with decay-blended Sinkhorn projection.

Randomness is addressed per (seed, purpose, iteration), so for a fixed
replicate seed the initial designs, the test grid, and the candidate pools
are identical across methods. Each active agent draws its candidate pool
from a fresh generator with the same key, so agents with identical bounds
score the same pool and agents with identical data propose identically.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import consensus, scheduler
from .acquisition import propose
from .problems import AgentSpec, Dataset, ExperimentConfig
from .sampling import CANDIDATE_STREAM, GRID_STREAM, INIT_STREAM, latin_hypercube, stream
from .surrogate import DEFAULT_PARAMS, KernelParams, fit


@dataclass
class IterationRecord:
    t: int
    active: tuple[int, ...]
    gamma: float | None
    proposals: dict[int, np.ndarray]          # raw acquisition outputs
    inputs: dict[int, np.ndarray]             # evaluated (post-consensus) inputs
    observations: dict[int, float]
    remaining: tuple[int, ...]
    similarity: np.ndarray | None             # over the active set (arco)
    weights: np.ndarray | None                # over the active set
    jitter: dict[int, float] = field(default_factory=dict)
    weights_renormalized: bool = False        # uniform_cbo restricted to a subset


@dataclass
class RunRecord:
    method: str
    seed: int
    horizon: int
    iterations_run: int
    budgets: tuple[int, ...]
    evaluations_used: tuple[int, ...]
    best_so_far: np.ndarray                   # (K, horizon + 1); col 0 = init best
    datasets: list[Dataset]
    steps: list[IterationRecord]


def initial_datasets(
    agents: Sequence[AgentSpec], seed: int
) -> list[Dataset]:
    """Per-agent Latin hypercube designs of size n_init, method-independent."""
    out = []
    for agent in agents:
        rng = stream(seed, INIT_STREAM, agent.id)
        points = latin_hypercube(
            agent.n_init, agent.bounds.lower_array, agent.bounds.upper_array, rng
        )
        ds = Dataset(agent.bounds)
        for row in points:
            ds.append(row, float(agent.objective(row)))
        out.append(ds)
    return out


def _shared_span(agents: Sequence[AgentSpec]) -> float:
    ref = agents[0]
    spans = [ref.bounds.span[j] for j in ref.layout.shared_dims]
    return float(max(spans))


def _kernel_params(config: ExperimentConfig) -> KernelParams:
    """Kernel for every surrogate fit in a run; lengthscale may come from
    the config, the named benchmark family, or the package default."""
    ell = config.lengthscale
    if ell is None and config.benchmark is not None:
        from .benchmarks import FAMILIES

        family = FAMILIES.get(config.benchmark)
        if family is not None:
            ell = family.lengthscale
    if ell is None:
        return DEFAULT_PARAMS
    return KernelParams(lengthscale=float(ell))


def _run(
    method: str,
    config: ExperimentConfig,
    agents: Sequence[AgentSpec],
    seed: int,
    initial: Sequence[Dataset] | None = None,
) -> RunRecord:
    k = len(agents)
    budgets = [a.budget for a in agents]
    schedule = scheduler.init_schedule(budgets)
    horizon = config.iterations if config.iterations is not None else schedule.b_max
    params = _kernel_params(config)

    if initial is None:
        datasets = initial_datasets(agents, seed)
    else:
        datasets = [ds.copy() for ds in initial]

    grid = None
    rate = None
    if method == "arco":
        grid = consensus.build_test_grid(
            agents,
            config.grid_multiplier,
            stream(seed, GRID_STREAM, 0),
            [stream(seed, GRID_STREAM, 1 + a.id) for a in agents],
        )
        rate = consensus.proximity_rate(
            _shared_span(agents), config.proximity_fraction
        )

    best = np.empty((k, horizon + 1))
    best[:, 0] = [ds.y.min() for ds in datasets]
    steps: list[IterationRecord] = []
    iterations_run = 0

    for t in range(horizon):
        if not scheduler.any_remaining(schedule):
            break
        iterations_run = t + 1
        active = scheduler.active_set(schedule, t)

        models = {}
        proposals: dict[int, np.ndarray] = {}
        jitters: dict[int, float] = {}
        for i in active:
            agent = agents[i]
            model = fit(
                datasets[i].x,
                datasets[i].y,
                agent.bounds.lower_array,
                agent.bounds.upper_array,
                params,
            )
            models[i] = model
            jitters[i] = model.jitter
            proposals[i] = propose(
                model,
                datasets[i].x,
                datasets[i].y,
                stream(seed, CANDIDATE_STREAM, t),
                config.candidates_per_dim,
            )

        gamma = None
        sim = None
        weights = None
        renormalized = False
        if active and method == "arco":
            embeds = consensus.behavior_embeddings(
                [models[i] for i in active], [agents[i] for i in active], grid
            )
            sim = consensus.similarity_matrix(embeds, rate)
            gamma = consensus.decay(t, horizon, config.alpha)
            weights = consensus.consensus_weights(
                sim, t, horizon, config.alpha,
                config.sinkhorn_tol, config.sinkhorn_max_iter,
            )
        elif active and method == "uniform_cbo":
            full = consensus.baseline_weights(t, horizon, k)
            if len(active) == k:
                weights = full
            else:
                # protocol extension: the uniform baseline assumes equal
                # budgets; under a partial active set its weights are
                # restricted and re-projected to doubly stochastic form
                weights = consensus.sinkhorn(
                    full[np.ix_(active, active)],
                    config.sinkhorn_tol,
                    config.sinkhorn_max_iter,
                )
                renormalized = True

        proposal_list: list[np.ndarray | None] = [proposals.get(i) for i in range(k)]
        if weights is not None and active:
            mixed = consensus.apply_consensus(weights, proposal_list, agents, active)
        else:
            mixed = proposal_list

        observations: dict[int, float] = {}
        for i in active:
            x_next = mixed[i]
            y_next = float(agents[i].objective(x_next))
            datasets[i].append(x_next, y_next)
            scheduler.record_evaluation(schedule, i)
            observations[i] = y_next

        col = best[:, t].copy()
        for i, y_next in observations.items():
            col[i] = min(col[i], y_next)
        best[:, t + 1] = col

        steps.append(
            IterationRecord(
                t=t,
                active=tuple(active),
                gamma=gamma,
                proposals={i: proposals[i].copy() for i in active},
                inputs={i: np.asarray(mixed[i]).copy() for i in active},
                observations=observations,
                remaining=tuple(int(v) for v in schedule.remaining),
                similarity=None if sim is None else sim.copy(),
                weights=None if weights is None else weights.copy(),
                jitter=jitters,
                weights_renormalized=renormalized,
            )
        )

    # budgets can exhaust before the horizon; carry the best forward
    for t in range(iterations_run, horizon):
        best[:, t + 1] = best[:, t]

    return RunRecord(
        method=method,
        seed=seed,
        horizon=horizon,
        iterations_run=iterations_run,
        budgets=tuple(budgets),
        evaluations_used=tuple(int(v) for v in schedule.used),
        best_so_far=best,
        datasets=datasets,
        steps=steps,
    )


def run_arco(
    config: ExperimentConfig,
    agents: Sequence[AgentSpec],
    seed: int,
    initial: Sequence[Dataset] | None = None,
) -> RunRecord:
    """Similarity-aware consensus run."""
    return _run("arco", config, agents, seed, initial)


def run_separate(
    config: ExperimentConfig,
    agents: Sequence[AgentSpec],
    seed: int,
    initial: Sequence[Dataset] | None = None,
) -> RunRecord:
    """Independent BO per agent; the budget schedule still applies."""
    return _run("separate", config, agents, seed, initial)


def run_uniform_cbo(
    config: ExperimentConfig,
    agents: Sequence[AgentSpec],
    seed: int,
    initial: Sequence[Dataset] | None = None,
) -> RunRecord:
    """Uniform-consensus baseline with the linear weight schedule."""
    return _run("uniform_cbo", config, agents, seed, initial)


RUNNERS = {
    "arco": run_arco,
    "separate": run_separate,
    "uniform_cbo": run_uniform_cbo,
}
