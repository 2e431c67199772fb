"""Gaussian-process regression with a Matérn-5/2 kernel, written against numpy.

The surrogate models estimated utility over the design hypercube: ARD
lengthscales, a constant mean concentrated out of the marginal likelihood, and
a learned (floored) noise variance to absorb the Monte-Carlo error of the
utility estimates.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import linalg, optimize

_SQRT5 = math.sqrt(5.0)


def _check_hyper(lengthscales, variance):
    ls = np.asarray(lengthscales, dtype=float).reshape(-1)
    if np.any(ls <= 0) or variance <= 0:
        raise ValueError("kernel hyperparameters must be positive")
    return ls


def _scaled_sqdist(x1: np.ndarray, x2: np.ndarray, lengthscales: np.ndarray) -> np.ndarray:
    a = x1 / lengthscales
    b = x2 / lengthscales
    d2 = np.sum(a**2, axis=1)[:, None] + np.sum(b**2, axis=1)[None, :] - 2.0 * a @ b.T
    return np.maximum(d2, 0.0)


def matern52_kernel(x1, x2, lengthscales, variance) -> np.ndarray:
    """Matérn-5/2 kernel matrix between two point sets."""
    x1 = np.atleast_2d(np.asarray(x1, dtype=float))
    x2 = np.atleast_2d(np.asarray(x2, dtype=float))
    if x1.shape[1] != x2.shape[1]:
        raise ValueError("points must share a dimension")
    ls = _check_hyper(lengthscales, variance)
    r = np.sqrt(_scaled_sqdist(x1, x2, ls))
    return variance * (1.0 + _SQRT5 * r + 5.0 * r**2 / 3.0) * np.exp(-_SQRT5 * r)


def matern52(x, x_prime, lengthscales, variance) -> float:
    """Kernel value sigma^2 (1 + sqrt5 r + 5 r^2/3) exp(-sqrt5 r) for one pair."""
    x = np.asarray(x, dtype=float).reshape(1, -1)
    x_prime = np.asarray(x_prime, dtype=float).reshape(1, -1)
    return float(matern52_kernel(x, x_prime, lengthscales, variance)[0, 0])


@dataclass
class GPSurrogate:
    """A fitted GP: training data, hyperparameters, and cached Cholesky solve."""

    X: np.ndarray
    y: np.ndarray
    lengthscales: np.ndarray
    signal_variance: float
    noise_variance: float
    mean: float
    chol: np.ndarray
    alpha: np.ndarray
    log_marginal_likelihood: float

    def predict(self, X_new):
        """Posterior mean and standard deviation of the latent function."""
        X_new = np.atleast_2d(np.asarray(X_new, dtype=float))
        k_star = matern52_kernel(self.X, X_new, self.lengthscales, self.signal_variance)
        mean = self.mean + k_star.T @ self.alpha
        v = linalg.solve_triangular(self.chol, k_star, lower=True)
        var = self.signal_variance - np.sum(v**2, axis=0)
        return mean, np.sqrt(np.maximum(var, 0.0))

    def mean_gradient(self, x) -> np.ndarray:
        """Analytic gradient of the posterior mean at one point.

        d k / d x_j = -(5/3) sigma^2 exp(-sqrt5 r) (1 + sqrt5 r) (x_j - x'_j) / l_j^2,
        which is smooth at r = 0.
        """
        x = np.asarray(x, dtype=float).reshape(1, -1)
        diff = x - self.X
        r = np.sqrt(np.maximum(np.sum((diff / self.lengthscales) ** 2, axis=1), 0.0))
        coef = -(5.0 / 3.0) * self.signal_variance * np.exp(-_SQRT5 * r) * (1.0 + _SQRT5 * r)
        grads = coef[:, None] * diff / self.lengthscales**2
        return grads.T @ self.alpha


class CholeskyFailure(RuntimeError):
    """Kernel matrix not positive definite even after jitter escalation."""


def _chol_with_jitter(K: np.ndarray, jitter: float):
    for factor in (1.0, 10.0, 100.0, 1e4):
        try:
            return linalg.cholesky(K + jitter * factor * np.eye(K.shape[0]), lower=True), jitter * factor
        except linalg.LinAlgError:
            continue
    raise CholeskyFailure("kernel matrix is numerically singular")


def _fit_at(log_params, X, y, jitter):
    d = X.shape[1]
    ls = np.exp(log_params[:d])
    sv = np.exp(log_params[d])
    nv = np.exp(log_params[d + 1])
    K = matern52_kernel(X, X, ls, sv) + nv * np.eye(X.shape[0])
    L, _ = _chol_with_jitter(K, jitter)
    ones = np.ones_like(y)
    w_y = linalg.cho_solve((L, True), y)
    w_1 = linalg.cho_solve((L, True), ones)
    mean = float(ones @ w_y) / float(ones @ w_1)
    resid = y - mean
    alpha = linalg.cho_solve((L, True), resid)
    lml = (
        -0.5 * float(resid @ alpha)
        - np.sum(np.log(np.diag(L)))
        - 0.5 * len(y) * math.log(2.0 * math.pi)
    )
    return lml, ls, sv, nv, mean, L, alpha


def gp_fit(
    points,
    utilities,
    n_restarts: int = 8,
    seed: int = 0,
    noise_floor: float = 1e-6,
    jitter: float = 1e-6,
) -> GPSurrogate:
    """Fit hyperparameters by maximizing the log marginal likelihood.

    Multi-restart L-BFGS-B over log hyperparameters (ARD lengthscales, signal
    variance, noise variance with a floor); the constant mean is concentrated
    out in closed form. Deterministic given the restart seed.
    """
    X = np.atleast_2d(np.asarray(points, dtype=float))
    y = np.asarray(utilities, dtype=float).reshape(-1)
    if X.shape[0] != y.size or X.shape[0] < 2:
        raise ValueError("need at least two (point, utility) pairs")
    d = X.shape[1]
    y_var = max(float(np.var(y)), 1e-8)

    lo = np.concatenate([np.full(d, np.log(0.03)), [np.log(1e-6 * y_var)], [np.log(noise_floor)]])
    hi = np.concatenate([np.full(d, np.log(30.0)), [np.log(1e3 * y_var + 1e-12)], [np.log(10.0 * y_var + 1e-12)]])
    bounds = list(zip(lo, hi))

    def objective(log_params):
        try:
            lml, *_ = _fit_at(log_params, X, y, jitter)
        except CholeskyFailure:
            return 1e12
        return -lml

    rng = np.random.default_rng(seed)
    first = np.concatenate([np.full(d, np.log(0.5)), [np.log(y_var)], [np.log(0.1 * y_var + noise_floor)]])
    starts = [np.clip(first, lo, hi)]
    starts += [rng.uniform(lo, hi) for _ in range(max(n_restarts - 1, 0))]

    best = None
    for x0 in starts:
        res = optimize.minimize(objective, x0, method="L-BFGS-B", bounds=bounds)
        if best is None or res.fun < best.fun:
            best = res
    lml, ls, sv, nv, mean, L, alpha = _fit_at(best.x, X, y, jitter)
    return GPSurrogate(
        X=X,
        y=y,
        lengthscales=ls,
        signal_variance=float(sv),
        noise_variance=float(max(nv, noise_floor)),
        mean=mean,
        chol=L,
        alpha=alpha,
        log_marginal_likelihood=float(lml),
    )
