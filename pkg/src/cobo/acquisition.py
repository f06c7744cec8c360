"""Expected improvement over finite candidate sets.

Minimization convention throughout: the incumbent is the smallest
observation so far and improvement means going below it.
"""

from __future__ import annotations

from typing import NamedTuple

import numpy as np
from scipy.stats import norm

from .sampling import latin_hypercube
from .surrogate import GpModel, predict_batch

STD_FLOOR = 1.0e-12
PERTURB_FRACTION = 0.01


class Incumbent(NamedTuple):
    x: np.ndarray
    value: float
    index: int


def incumbent(x: np.ndarray, y: np.ndarray) -> Incumbent:
    """Best observation so far; ties resolved to the earliest index."""
    y = np.asarray(y, dtype=float)
    if y.size == 0:
        raise ValueError("incumbent needs at least one observation")
    idx = int(np.argmin(y))  # argmin returns the first minimum
    return Incumbent(np.atleast_2d(np.asarray(x, dtype=float))[idx].copy(),
                     float(y[idx]), idx)


def expected_improvement(mean, std, f_star):
    """Closed-form EI for minimization.

    With z = (f_star - mean) / std,

        EI = (f_star - mean) * Phi(z) + std * phi(z)

    except that std below ``STD_FLOOR`` collapses to the deterministic limit
    max(0, f_star - mean). The result is floored at 0. Accepts scalars or
    arrays (broadcast); raises ``ValueError`` on non-finite inputs.
    """
    mean_arr = np.asarray(mean, dtype=float)
    std_arr = np.asarray(std, dtype=float)
    if not (
        np.all(np.isfinite(mean_arr))
        and np.all(np.isfinite(std_arr))
        and np.all(np.isfinite(f_star))
    ):
        raise ValueError("expected_improvement requires finite inputs")
    improve = f_star - mean_arr
    degenerate = std_arr < STD_FLOOR
    safe_std = np.where(degenerate, 1.0, std_arr)
    z = improve / safe_std
    value = improve * norm.cdf(z) + std_arr * norm.pdf(z)
    value = np.where(degenerate, np.maximum(improve, 0.0), value)
    value = np.maximum(value, 0.0)
    if np.ndim(mean) == 0 and np.ndim(std) == 0:
        return float(value)
    return value


def candidate_set(
    lower: np.ndarray,
    upper: np.ndarray,
    x_star: np.ndarray,
    rng: np.random.Generator,
    candidates_per_dim: int = 1024,
) -> np.ndarray:
    """Candidate pool for one proposal.

    A Latin hypercube of ``candidates_per_dim * d`` points, followed by the
    incumbent perturbed by +/- PERTURB_FRACTION of each dimension's range
    (one pair per dimension), clipped to the bounds. Index order is the
    hypercube first, then the perturbations; ties in EI resolve to the
    lowest index.
    """
    lower = np.asarray(lower, dtype=float)
    upper = np.asarray(upper, dtype=float)
    d = lower.size
    pool = latin_hypercube(candidates_per_dim * d, lower, upper, rng)
    span = upper - lower
    nudges = []
    for j in range(d):
        for sign in (1.0, -1.0):
            point = np.asarray(x_star, dtype=float).copy()
            point[j] += sign * PERTURB_FRACTION * span[j]
            nudges.append(point)
    nudged = np.clip(np.asarray(nudges), lower, upper)
    return np.vstack([pool, nudged])


def propose(
    model: GpModel,
    x_obs: np.ndarray,
    y_obs: np.ndarray,
    rng: np.random.Generator,
    candidates_per_dim: int = 1024,
) -> np.ndarray:
    """Next input: the EI argmax over the candidate set.

    EI is evaluated in original observation units (the predictive std is
    rescaled by the model's y_std); the argmax is invariant to that affine
    choice. Deterministic given the model, the observations, and the rng
    state; exact EI ties go to the lowest candidate index.
    """
    best = incumbent(x_obs, y_obs)
    cands = candidate_set(model.lower, model.upper, best.x, rng, candidates_per_dim)
    pred = predict_batch(model, cands)
    ei = expected_improvement(pred.mean, pred.std * model.y_std, best.value)
    return cands[int(np.argmax(ei))].copy()
