"""Normalized regret and early-convergence AUC over replicate batches.

Both metrics normalize each agent by its oracle range (f_max - f_min) and
measure distance above the agent's reference optimum, then average across
agents, then aggregate across replicates. Trajectory index 0 is the best of
the initial design; indices 1..T are the global iterations.

Agents missing optimum/range metadata are skipped (never defaulted); it is
an error if no agent has metadata.
"""

from __future__ import annotations

from typing import NamedTuple, Sequence

import numpy as np

from .problems import AgentSpec


class MetricsError(ValueError):
    pass


class MetricSummary(NamedTuple):
    mean: float
    std: float
    per_replicate: np.ndarray


def auc_window(horizon: int, early_fraction: float = 0.1) -> int:
    """Number of leading iterations in the AUC window: round(fraction * T), >= 1."""
    return max(1, int(np.floor(early_fraction * horizon + 0.5)))


def _usable_agents(agents: Sequence[AgentSpec]) -> list[int]:
    usable = [
        a.id
        for a in agents
        if a.true_optimum is not None and a.f_min is not None and a.f_max is not None
    ]
    if not usable:
        raise MetricsError("no agent has optimum/range metadata; metrics undefined")
    return usable


def _normalized(best: np.ndarray, agents: Sequence[AgentSpec], usable) -> np.ndarray:
    # (len(usable), columns) normalized distance above each agent's optimum
    rows = []
    for i in usable:
        a = agents[i]
        rows.append((best[i] - a.true_optimum) / (a.f_max - a.f_min))
    return np.asarray(rows)


def final_regret(
    best_matrices: Sequence[np.ndarray], agents: Sequence[AgentSpec]
) -> MetricSummary:
    """Mean over agents of (best found - optimum) / range, per replicate.

    ``best_matrices`` holds one (K, T+1) best-so-far matrix per replicate.
    Aggregates to mean and sample std (ddof=1; 0.0 for a single replicate).
    """
    usable = _usable_agents(agents)
    values = []
    for best in best_matrices:
        norm = _normalized(best[:, -1:], agents, usable)
        values.append(float(np.mean(norm)))
    per = np.asarray(values)
    std = float(np.std(per, ddof=1)) if per.size > 1 else 0.0
    return MetricSummary(mean=float(np.mean(per)), std=std, per_replicate=per)


def early_auc(
    best_matrices: Sequence[np.ndarray],
    agents: Sequence[AgentSpec],
    early_fraction: float = 0.1,
) -> MetricSummary:
    """Average normalized best-so-far over the first ~10% of iterations.

    Window indices are 1..N with N = ``auc_window(T)``. The reported mean
    (average of per-replicate AUCs) is identical to the AUC of the
    cross-replicate mean trajectory because the statistic is linear in the
    trajectories; the std is taken across replicates.
    """
    usable = _usable_agents(agents)
    values = []
    for best in best_matrices:
        horizon = best.shape[1] - 1
        n = auc_window(horizon, early_fraction)
        norm = _normalized(best[:, 1 : n + 1], agents, usable)
        values.append(float(np.mean(norm)))
    per = np.asarray(values)
    std = float(np.std(per, ddof=1)) if per.size > 1 else 0.0
    return MetricSummary(mean=float(np.mean(per)), std=std, per_replicate=per)
