"""Gaussian-process surrogate with fixed hyperparameters.

The model never learns hyperparameters. Inputs are min-max normalized per
dimension to [0, 1] using the agent's bounds, observations are standardized
to zero mean and unit variance at fit time (``y_std := 1`` when all
observations are equal), and the kernel is squared-exponential

    k(a, b) = signal_variance * exp(-||a - b||^2 / (2 * lengthscale^2))

with the lengthscale expressed in normalized input space. The factorization
is a Cholesky of ``K + jitter * I``; the jitter starts at the noise variance
and is multiplied by 10 on failure, up to ``MAX_JITTER``.

Predictions report the mean in original observation units and the variance
in standardized units:

    mean     = y_mean + y_std * (k_*^T alpha)
    variance = signal_variance - ||L^-1 k_*||^2 + noise_variance

floored at ``VARIANCE_FLOOR``. Out-of-bounds queries are clamped to the
bounds before normalization.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.linalg import cholesky, solve_triangular
from scipy.spatial.distance import cdist

MAX_JITTER = 1.0e-2
VARIANCE_FLOOR = 1.0e-12


class CholeskyError(RuntimeError):
    """Factorization failed after escalating the diagonal jitter."""

    def __init__(self, jitter: float):
        super().__init__(
            f"Cholesky factorization failed with diagonal jitter up to {jitter:g}"
        )
        self.jitter = jitter


@dataclass(frozen=True)
class KernelParams:
    lengthscale: float = 0.5
    signal_variance: float = 1.0
    noise_variance: float = 1.0e-6

    def __post_init__(self):
        # Zero noise would also stall jitter escalation at zero.
        if not (self.lengthscale > 0 and self.signal_variance > 0 and self.noise_variance > 0):
            raise ValueError("kernel hyperparameters must be strictly positive")


DEFAULT_PARAMS = KernelParams()


class Prediction(NamedTuple):
    mean: float | np.ndarray
    variance: float | np.ndarray
    std: float | np.ndarray


@dataclass
class GpModel:
    x_unit: np.ndarray      # (n, d) normalized training inputs
    lower: np.ndarray       # (d,) bounds used for normalization
    upper: np.ndarray
    y_mean: float
    y_std: float
    chol: np.ndarray        # lower-triangular factor of K + jitter * I
    alpha: np.ndarray       # (K + jitter * I)^-1 y_standardized
    jitter: float           # final diagonal addition actually used
    params: KernelParams

    @property
    def n_train(self) -> int:
        return self.x_unit.shape[0]

    @property
    def escalated(self) -> bool:
        # True when the base noise was not enough for a stable factorization.
        return self.jitter > self.params.noise_variance


def kernel_matrix(a: np.ndarray, b: np.ndarray, params: KernelParams) -> np.ndarray:
    sq = cdist(a, b, "sqeuclidean")
    return params.signal_variance * np.exp(-sq / (2.0 * params.lengthscale**2))


def _normalize(x: np.ndarray, lower: np.ndarray, upper: np.ndarray) -> np.ndarray:
    clipped = np.clip(x, lower, upper)
    return (clipped - lower) / (upper - lower)


def _factorize(k: np.ndarray, noise: float) -> tuple[np.ndarray, float]:
    """Cholesky of k + jitter*I, escalating jitter from `noise` by 10x steps."""
    jitter = noise
    n = k.shape[0]
    while True:
        try:
            ell = cholesky(k + jitter * np.eye(n), lower=True)
            return ell, jitter
        except np.linalg.LinAlgError:
            pass
        if jitter >= MAX_JITTER:
            raise CholeskyError(jitter)
        jitter = min(jitter * 10.0, MAX_JITTER)


def fit(
    x: np.ndarray,
    y: np.ndarray,
    lower: np.ndarray,
    upper: np.ndarray,
    params: KernelParams = DEFAULT_PARAMS,
) -> GpModel:
    """Fit the fixed-hyperparameter GP to observations.

    ``x`` is (n, d) in original units, ``y`` is (n,). Raises ``ValueError``
    on non-finite observations or shape mismatches and ``CholeskyError``
    when no jitter up to ``MAX_JITTER`` yields a valid factorization.
    """
    x = np.atleast_2d(np.asarray(x, dtype=float))
    y = np.atleast_1d(np.asarray(y, dtype=float))
    lower = np.atleast_1d(np.asarray(lower, dtype=float))
    upper = np.atleast_1d(np.asarray(upper, dtype=float))
    if x.shape[0] != y.shape[0]:
        raise ValueError("x and y must have matching leading dimension")
    if x.shape[0] < 1:
        raise ValueError("fit needs at least one observation")
    if x.shape[1] != lower.size:
        raise ValueError("x dimension does not match bounds")
    if not np.all(np.isfinite(x)) or not np.all(np.isfinite(y)):
        raise ValueError("fit requires finite inputs and observations")

    x_unit = _normalize(x, lower, upper)
    y_mean = float(np.mean(y))
    y_sd = float(np.std(y))
    if y_sd == 0.0:
        y_sd = 1.0
    y_unit = (y - y_mean) / y_sd

    k = kernel_matrix(x_unit, x_unit, params)
    ell, jitter = _factorize(k, params.noise_variance)
    alpha = solve_triangular(
        ell.T, solve_triangular(ell, y_unit, lower=True), lower=False
    )
    return GpModel(
        x_unit=x_unit,
        lower=lower,
        upper=upper,
        y_mean=y_mean,
        y_std=y_sd,
        chol=ell,
        alpha=alpha,
        jitter=jitter,
        params=params,
    )


def predict_batch(model: GpModel, x: np.ndarray) -> Prediction:
    """Posterior at each row of ``x``; equals point-by-point ``predict``."""
    x = np.atleast_2d(np.asarray(x, dtype=float))
    x_unit = _normalize(x, model.lower, model.upper)
    k_star = kernel_matrix(model.x_unit, x_unit, model.params)  # (n, m)
    mean = model.y_mean + model.y_std * (k_star.T @ model.alpha)
    v = solve_triangular(model.chol, k_star, lower=True)
    variance = (
        model.params.signal_variance
        - np.sum(v * v, axis=0)
        + model.params.noise_variance
    )
    variance = np.maximum(variance, VARIANCE_FLOOR)
    return Prediction(mean=mean, variance=variance, std=np.sqrt(variance))


def predict(model: GpModel, x: np.ndarray) -> Prediction:
    """Posterior mean/variance/std at a single point."""
    out = predict_batch(model, np.atleast_2d(np.asarray(x, dtype=float)))
    return Prediction(float(out.mean[0]), float(out.variance[0]), float(out.std[0]))
