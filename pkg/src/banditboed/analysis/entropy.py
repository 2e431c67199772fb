"""Entropy metrics scoring how informative a posterior is."""

from __future__ import annotations

import numpy as np


def shannon_entropy(probs) -> float:
    """-sum p ln p in nats, with 0 ln 0 taken as 0."""
    p = np.asarray(probs, dtype=float)
    if np.any(p < 0) or abs(p.sum() - 1.0) > 1e-9:
        raise ValueError("probabilities must be nonnegative and sum to 1")
    nz = p > 0
    return float(-np.sum(p[nz] * np.log(p[nz])))


def differential_entropy(density, weights) -> float:
    """Quadrature differential entropy -sum w p ln p of a normalized grid density."""
    p = np.asarray(density, dtype=float)
    w = np.asarray(weights, dtype=float)
    if p.shape != w.shape:
        raise ValueError("density and weights must align")
    if np.any(p < 0):
        raise ValueError("density must be nonnegative")
    if abs(float(np.sum(w * p)) - 1.0) > 1e-6:
        raise ValueError("grid density must integrate to 1 under the given weights")
    nz = p > 0
    return float(-np.sum(w[nz] * p[nz] * np.log(p[nz])))
