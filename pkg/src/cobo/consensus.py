"""Similarity-aware consensus over candidate inputs.

Each collaborating agent is summarized by a behavior embedding: its GP
posterior mean (standardized units) over a test grid that is identical for
all agents on the shared dimensions and fixed for a whole replicate.
Pairwise similarity multiplies two gates,

    s_pearson   = (rho + 1) / 2            rho: Pearson correlation of embeddings
    s_proximity = exp(-rate * ||x*_i - x*_j||^2)   over shared coordinates

so that either signal alone can veto collaboration. The blend
``gamma * S + (1 - gamma) * I`` with ``gamma = exp(-alpha * t / T)`` moves
from full trust of similarity toward independence, and a Sinkhorn projection
makes the result doubly stochastic. Consensus then replaces each agent's
shared coordinates with the W-weighted mixture of all active agents' shared
coordinates; private coordinates are never touched.

The uniform baseline (``baseline_weights``) starts at (1/K) * ones and
interpolates linearly to the identity at t = T.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .problems import AgentSpec
from .surrogate import GpModel, predict_batch


class SinkhornError(RuntimeError):
    """Normalization did not converge within the iteration limit."""

    def __init__(self, residual: float, iterations: int):
        super().__init__(
            f"Sinkhorn did not converge in {iterations} iterations "
            f"(residual {residual:.3e})"
        )
        self.residual = residual
        self.iterations = iterations


@dataclass(frozen=True)
class TestGrid:
    """Shared-coordinate grid plus per-agent private fills, all (n, .)."""

    shared: np.ndarray                  # (n, d_shared), common to all agents
    private: tuple[np.ndarray, ...]     # per agent, (n, d_private_i), fixed
    n: int


@dataclass(frozen=True)
class BehaviorEmbedding:
    mu: np.ndarray          # standardized posterior mean over the grid
    min_index: int          # grid argmin, first index on ties
    x_min_shared: np.ndarray  # shared coordinates of the predicted minimizer


def build_test_grid(
    agents: Sequence[AgentSpec],
    multiplier: int,
    shared_rng: np.random.Generator,
    private_rngs: Sequence[np.random.Generator],
) -> TestGrid:
    """Latin-hypercube test grid of ``multiplier * d`` points.

    d counts the shared block plus the widest private block, so the grid
    density scales with the full input dimension. The shared block is drawn
    once (all agents see identical shared coordinates); each agent's private
    block is an independent hypercube of the same size.
    """
    from .sampling import latin_hypercube

    ref = agents[0]
    shared_idx = list(ref.layout.shared_dims)
    lo = ref.bounds.lower_array[shared_idx]
    hi = ref.bounds.upper_array[shared_idx]
    widest_private = max(len(a.layout.private_dims) for a in agents)
    n = multiplier * (len(shared_idx) + widest_private)
    shared = latin_hypercube(n, lo, hi, shared_rng)
    fills = []
    for agent, rng in zip(agents, private_rngs):
        pidx = list(agent.layout.private_dims)
        fills.append(
            latin_hypercube(
                n,
                agent.bounds.lower_array[pidx],
                agent.bounds.upper_array[pidx],
                rng,
            )
        )
    return TestGrid(shared=shared, private=tuple(fills), n=n)


def grid_inputs(grid: TestGrid, agent: AgentSpec) -> np.ndarray:
    """Assemble the full (n, d) query matrix for one agent."""
    x = np.empty((grid.n, agent.dimension))
    x[:, list(agent.layout.shared_dims)] = grid.shared
    x[:, list(agent.layout.private_dims)] = grid.private[agent.id]
    return x


def behavior_embeddings(
    models: Sequence[GpModel],
    agents: Sequence[AgentSpec],
    grid: TestGrid,
) -> list[BehaviorEmbedding]:
    """Embeddings for the given (model, agent) pairs over the grid."""
    out = []
    for model, agent in zip(models, agents):
        pred = predict_batch(model, grid_inputs(grid, agent))
        mu = (np.asarray(pred.mean) - model.y_mean) / model.y_std
        idx = int(np.argmin(mu))
        out.append(
            BehaviorEmbedding(
                mu=mu, min_index=idx, x_min_shared=grid.shared[idx].copy()
            )
        )
    return out


def pearson_similarity(u: np.ndarray, v: np.ndarray) -> float:
    """Pearson correlation mapped to [0, 1] via (rho + 1) / 2.

    A constant vector has undefined correlation; rho := 0 (similarity 0.5).
    """
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    if u.shape != v.shape or u.ndim != 1:
        raise ValueError("pearson_similarity needs two equal-length vectors")
    du = u - u.mean()
    dv = v - v.mean()
    nu = np.sqrt(du @ du)
    nv = np.sqrt(dv @ dv)
    if nu == 0.0 or nv == 0.0:
        rho = 0.0
    else:
        rho = float(np.clip((du @ dv) / (nu * nv), -1.0, 1.0))
    return (rho + 1.0) / 2.0


def proximity_rate(delta: float, fraction: float = 0.1) -> float:
    """Decay rate such that similarity = `fraction` at distance fraction*delta."""
    if delta <= 0 or not (0.0 < fraction < 1.0):
        raise ValueError("proximity_rate needs delta > 0 and fraction in (0, 1)")
    return -np.log(fraction) / (fraction * delta) ** 2


def proximity_similarity(x_i: np.ndarray, x_j: np.ndarray, rate: float) -> float:
    diff = np.asarray(x_i, dtype=float) - np.asarray(x_j, dtype=float)
    return float(np.exp(-rate * float(diff @ diff)))


def similarity_matrix(
    embeddings: Sequence[BehaviorEmbedding], rate: float
) -> np.ndarray:
    """Multiplicatively gated similarity: S_ij = pearson * proximity, S_ii = 1."""
    k = len(embeddings)
    s = np.eye(k)
    for i in range(k):
        for j in range(i + 1, k):
            value = pearson_similarity(
                embeddings[i].mu, embeddings[j].mu
            ) * proximity_similarity(
                embeddings[i].x_min_shared, embeddings[j].x_min_shared, rate
            )
            s[i, j] = value
            s[j, i] = value
    return s


def decay(t: int, horizon: int, alpha: float = 3.0) -> float:
    """gamma(t) = exp(-alpha * t / horizon); 1 at t=0, decaying toward exp(-alpha)."""
    if horizon < 1:
        raise ValueError("decay needs horizon >= 1")
    return float(np.exp(-alpha * t / horizon))


# Alternating sweeps spent before trying the Newton solve on symmetric input.
_SINKHORN_WARMUP = 100


def _residual(w: np.ndarray) -> float:
    return max(
        float(np.abs(w.sum(axis=1) - 1.0).max()),
        float(np.abs(w.sum(axis=0) - 1.0).max()),
    )


def _symmetric_scaling(matrix: np.ndarray, tol: float) -> np.ndarray | None:
    """Doubly stochastic scaling diag(d) M diag(d) of a symmetric matrix.

    Solves d * (M d) = 1 by damped Newton iteration. The solution, when it
    exists, is the Sinkhorn limit of M; heavily gated similarity matrices
    that stall the alternating scheme (near-reducible support) converge here
    in a handful of steps. Returns None when no positive scaling is found,
    e.g. when M has support but no strictly positive diagonal pairing.
    """
    m = matrix
    d = 1.0 / np.sqrt(m.sum(axis=1))
    f = d * (m @ d) - 1.0
    for _ in range(60):
        if float(np.abs(f).max()) < 0.1 * tol:
            w = (d[:, None] * m) * d[None, :]
            if _residual(w) < tol:
                return w
        md = m @ d
        jac = np.diag(md) + d[:, None] * m
        try:
            step = np.linalg.solve(jac, -f)
        except np.linalg.LinAlgError:
            step, *_ = np.linalg.lstsq(jac, -f, rcond=None)
        norm0 = float(np.linalg.norm(f))
        eta = 1.0
        for _ in range(60):
            trial = d + eta * step
            if np.all(trial > 0):
                f_trial = trial * (m @ trial) - 1.0
                if float(np.linalg.norm(f_trial)) < norm0:
                    d, f = trial, f_trial
                    break
            eta *= 0.5
        else:
            return None
    return None


def sinkhorn(
    matrix: np.ndarray, tol: float = 1.0e-9, max_iter: int = 1000
) -> np.ndarray:
    """Project a nonnegative square matrix to doubly stochastic form.

    Alternately rescales rows then columns to sum to one until both sets of
    sums are within ``tol``. Symmetric inputs that have not converged after a
    short warmup are finished by a Newton solve for the symmetric scaling
    diag(d) M diag(d), which reaches the same limit but is immune to the
    slow mixing of near-reducible matrices (gated similarities put entries
    hundreds of orders of magnitude apart, where plain alternation needs
    millions of sweeps). Raises ``ValueError`` for negative entries or a
    zero row/column, and ``SinkhornError`` (carrying the final residual) if
    the iteration limit is hit without convergence.
    """
    w = np.array(matrix, dtype=float)
    if w.ndim != 2 or w.shape[0] != w.shape[1]:
        raise ValueError("sinkhorn needs a square matrix")
    if not np.all(np.isfinite(w)) or np.any(w < 0):
        raise ValueError("sinkhorn needs finite nonnegative entries")
    if np.any(w.sum(axis=1) == 0) or np.any(w.sum(axis=0) == 0):
        raise ValueError("sinkhorn needs every row and column to have mass")
    symmetric = bool(np.array_equal(matrix, np.asarray(matrix).T))
    residual = np.inf
    for sweep in range(max_iter):
        w /= w.sum(axis=1, keepdims=True)
        w /= w.sum(axis=0, keepdims=True)
        residual = _residual(w)
        if residual < tol:
            return w
        if symmetric and sweep + 1 == _SINKHORN_WARMUP:
            scaled = _symmetric_scaling(np.asarray(matrix, dtype=float), tol)
            if scaled is not None:
                return scaled
    raise SinkhornError(residual, max_iter)


def consensus_weights(
    similarity: np.ndarray,
    t: int,
    horizon: int,
    alpha: float = 3.0,
    tol: float = 1.0e-9,
    max_iter: int = 1000,
) -> np.ndarray:
    """W(t) = sinkhorn(gamma * S + (1 - gamma) * I)."""
    gamma = decay(t, horizon, alpha)
    k = similarity.shape[0]
    blend = gamma * similarity + (1.0 - gamma) * np.eye(k)
    return sinkhorn(blend, tol=tol, max_iter=max_iter)


def baseline_weights(t: int, horizon: int, k: int) -> np.ndarray:
    """Uniform-consensus weights: (1/K) * ones at t=0, exactly I at t=horizon.

    Closed form of the linear recurrence that adds (K-1)/(TK) to the diagonal
    and removes 1/(TK) from each off-diagonal entry per iteration. Computed
    as off = (1 - t/T)/K so the identity at t = T is exact in floating point.
    """
    if k < 1:
        raise ValueError("baseline_weights needs k >= 1")
    if horizon < 1 or t < 0 or t > horizon:
        raise ValueError("baseline_weights needs 0 <= t <= horizon, horizon >= 1")
    off = (1.0 - t / horizon) / k
    w = np.full((k, k), off)
    np.fill_diagonal(w, 1.0 - (k - 1) * off)
    return w


def apply_consensus(
    weights: np.ndarray,
    proposals: Sequence[np.ndarray | None],
    agents: Sequence[AgentSpec],
    active: Sequence[int],
) -> list[np.ndarray | None]:
    """Mix shared coordinates of the active agents' proposals by W.

    ``weights`` is |active| x |active| in the order of ``active``; entries of
    ``proposals`` for inactive agents pass through untouched. Each result is
    clipped to its agent's bounds to absorb floating-point drift. Private
    coordinates are copied bit-for-bit from the raw proposals.
    """
    active = list(active)
    if weights.shape != (len(active), len(active)):
        raise ValueError("weights shape does not match the active set")
    shared = np.stack(
        [
            np.asarray(proposals[i], dtype=float)[list(agents[i].layout.shared_dims)]
            for i in active
        ]
    )
    mixed = weights @ shared
    out: list[np.ndarray | None] = [
        None if p is None else np.asarray(p, dtype=float).copy() for p in proposals
    ]
    for row, i in enumerate(active):
        vec = out[i]
        vec[list(agents[i].layout.shared_dims)] = mixed[row]
        out[i] = agents[i].bounds.clip(vec)
    return out
