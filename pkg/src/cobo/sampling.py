"""Seeded RNG streams and Latin hypercube designs.

Every random draw in a run comes from a generator addressed by
``(seed, *key)``. Streams are mutually independent, so the initial designs
of a replicate never depend on which method is run or on how many draws any
other stream consumed.
"""

from __future__ import annotations

import numpy as np

# Stream purposes. Key layout used by the run loops:
#   (seed, INIT_STREAM, agent)          initial designs
#   (seed, GRID_STREAM, 0)              shared test-grid coordinates
#   (seed, GRID_STREAM, 1 + agent)      per-agent private grid fills
#   (seed, CANDIDATE_STREAM, t)         acquisition candidates, shared at t
#   (seed, ORACLE_STREAM, fam, agent)   benchmark range oracle
INIT_STREAM = 0
GRID_STREAM = 1
CANDIDATE_STREAM = 2
ORACLE_STREAM = 3


def stream(seed: int, *key: int) -> np.random.Generator:
    """Independent generator for ``(seed, key)``.

    Same seed and key give the same sequence on every platform; distinct
    keys give statistically independent streams.
    """
    return np.random.default_rng(np.random.SeedSequence(int(seed), spawn_key=key))


def latin_hypercube(
    n: int,
    lower: np.ndarray,
    upper: np.ndarray,
    rng: np.random.Generator,
) -> np.ndarray:
    """Draw an ``n``-point Latin hypercube on the box [lower, upper].

    Each dimension is cut into ``n`` equal-width strata; every stratum holds
    exactly one point, placed uniformly at random within the stratum. Returns
    an (n, d) array. d = 0 is allowed and yields an (n, 0) array, which keeps
    degenerate private-dimension fills trivial.
    """
    lower = np.atleast_1d(np.asarray(lower, dtype=float))
    upper = np.atleast_1d(np.asarray(upper, dtype=float))
    if lower.shape != upper.shape or lower.ndim != 1:
        raise ValueError("lower and upper must be 1-D arrays of equal length")
    if n < 1:
        raise ValueError("latin_hypercube needs n >= 1")
    d = lower.size
    jitter = rng.random((n, d))
    cells = np.empty((n, d))
    for j in range(d):
        cells[:, j] = rng.permutation(n)
    unit = (cells + jitter) / n
    return lower + unit * (upper - lower)
