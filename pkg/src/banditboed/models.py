"""Candidate behavioral models and their parameter priors."""

from __future__ import annotations

from enum import IntEnum

import numpy as np


class ModelKind(IntEnum):
    WSLTS = 1  # Win-Stay Lose-Thompson-Sample
    AEG = 2  # Autoregressive epsilon-greedy
    GLS = 3  # Generalized latent state


N_PARAMS = {ModelKind.WSLTS: 3, ModelKind.AEG: 2, ModelKind.GLS: 5}

PARAM_NAMES = {
    ModelKind.WSLTS: ("win_stay", "lose_shift", "temperature"),
    ModelKind.AEG: ("explore", "stickiness"),
    ModelKind.GLS: ("accuracy", "pi_00", "pi_01", "pi_10", "pi_11"),
}

MODEL_PRIOR = np.array([1 / 3, 1 / 3, 1 / 3])

# numerical guard for the WSLTS temperature exponent
TEMPERATURE_MIN = 1e-6
TEMPERATURE_MAX = 1e9


def validate_params(model: ModelKind, theta: np.ndarray) -> np.ndarray:
    """Check a parameter vector against the model's support; returns it as float array."""
    theta = np.asarray(theta, dtype=float)
    if theta.shape[-1] != N_PARAMS[ModelKind(model)]:
        raise ValueError(f"{ModelKind(model).name} expects {N_PARAMS[ModelKind(model)]} parameters")
    unit = theta if model != ModelKind.WSLTS else theta[..., :2]
    if np.any(unit < 0.0) or np.any(unit > 1.0):
        raise ValueError("probability parameters must lie in [0, 1]")
    if model == ModelKind.WSLTS and np.any(theta[..., 2] <= 0.0):
        raise ValueError("WSLTS temperature must be positive")
    return theta


def sample_prior(model: ModelKind, rng: np.random.Generator, size: int | None = None) -> np.ndarray:
    """Draw parameters from the model's prior.

    Probability-valued parameters are Uniform(0, 1); the WSLTS temperature is
    LogNormal(0, 1). With ``size`` given, returns an array of shape (size, n_params).
    """
    n = 1 if size is None else size
    p = N_PARAMS[ModelKind(model)]
    theta = rng.uniform(0.0, 1.0, size=(n, p))
    if model == ModelKind.WSLTS:
        theta[:, 2] = rng.lognormal(0.0, 1.0, size=n)
    return theta[0] if size is None else theta


def sample_model_indicator(rng: np.random.Generator, size: int | None = None):
    """Draw model indicators from the uniform categorical prior."""
    draws = rng.integers(1, 4, size=1 if size is None else size)
    if size is None:
        return ModelKind(int(draws[0]))
    return draws.astype(np.int64)
