"""Expected Improvement acquisition and its maximization over the unit box."""

from __future__ import annotations

import numpy as np
from scipy import optimize
from scipy.stats import norm

from .gp import GPSurrogate


def expected_improvement(gp: GPSurrogate, X, incumbent: float) -> np.ndarray:
    """EI under the maximization convention with no exploration offset.

    EI(x) = (mu - b) Phi(z) + sigma phi(z) with z = (mu - b) / sigma, and 0
    where the posterior is (numerically) deterministic.
    """
    X = np.atleast_2d(np.asarray(X, dtype=float))
    mu, sd = gp.predict(X)
    ei = np.zeros_like(mu)
    live = sd > 1e-12
    z = (mu[live] - incumbent) / sd[live]
    ei[live] = (mu[live] - incumbent) * norm.cdf(z) + sd[live] * norm.pdf(z)
    return np.maximum(ei, 0.0)


def maximize_acquisition(
    gp: GPSurrogate,
    incumbent: float,
    dim: int,
    n_starts: int = 64,
    seed: int = 0,
) -> np.ndarray:
    """Multi-start bounded quasi-Newton ascent on EI over [0, 1]^dim.

    Starts mix uniform draws with jittered copies of the best observed
    designs, which keeps the search effective once the GP concentrates.
    """
    rng = np.random.default_rng(seed)
    n_uniform = max(n_starts - 8, 1)
    starts = [rng.uniform(size=dim) for _ in range(n_uniform)]
    order = np.argsort(gp.y)[::-1][:8]
    for i in order:
        starts.append(np.clip(gp.X[i] + 0.05 * rng.standard_normal(dim), 0.0, 1.0))

    def neg_ei(x):
        return -float(expected_improvement(gp, x[None, :], incumbent)[0])

    best_x, best_val = None, np.inf
    for x0 in starts:
        res = optimize.minimize(
            neg_ei, x0, method="L-BFGS-B", bounds=[(0.0, 1.0)] * dim
        )
        if res.fun < best_val:
            best_val, best_x = res.fun, np.clip(res.x, 0.0, 1.0)
    return best_x
