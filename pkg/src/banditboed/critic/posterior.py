"""Amortized posterior estimates from trained critics.

A critic trained to tightness satisfies T(v, y) = 1 + log p(v | y) / p(v), so
prior * exp(T - 1) recovers the posterior up to normalization. Discrete targets
are normalized by direct summation, continuous ones by quadrature on a
parameter grid; ensemble members are averaged after normalization.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import torch
from scipy.special import logsumexp

from ..models import ModelKind
from .encoding import encode_params
from .network import CriticNetwork


def _networks(members) -> list[CriticNetwork]:
    nets = [getattr(m, "network", m) for m in members]
    if not nets:
        raise ValueError("ensemble must be non-empty")
    return nets


def _member_t_values(net: CriticNetwork, y: np.ndarray, v_rows: np.ndarray) -> np.ndarray:
    """T(v, y) for every v row against every y row, shape (n_y, n_v).

    Block summaries are computed once per y row; the head then runs over the
    smaller of the two axes (few classes for many datasets, or one dataset
    against a large parameter grid).
    """
    yt = torch.from_numpy(np.atleast_2d(np.asarray(y, dtype=np.float32)))
    vt = torch.from_numpy(np.asarray(v_rows, dtype=np.float32))
    n_y, n_v = yt.shape[0], vt.shape[0]
    with torch.no_grad():
        s = net.summaries(yt)
        out = np.empty((n_y, n_v))
        if n_v <= n_y:
            for j in range(n_v):
                vj = vt[j].unsqueeze(0).expand(n_y, -1)
                out[:, j] = net.head_values(vj, s).double().numpy()
        else:
            for i in range(n_y):
                si = s[i].unsqueeze(0).expand(n_v, -1)
                out[i, :] = net.head_values(vt, si).double().numpy()
    if not np.all(np.isfinite(out)):
        raise FloatingPointError("critic produced non-finite outputs")
    return out


def posterior_discrete(members, y, class_features, prior) -> np.ndarray:
    """Posterior probabilities over a discrete variable of interest.

    Each ensemble member's prior * exp(T - 1) is normalized to sum to one;
    the normalized posteriors are then averaged across members. ``y`` may be a
    single feature vector or a batch of rows.
    """
    nets = _networks(members)
    prior = np.asarray(prior, dtype=float)
    if np.any(prior < 0) or abs(prior.sum() - 1.0) > 1e-9:
        raise ValueError("prior must be a probability vector")
    single = np.asarray(y).ndim == 1
    log_prior = np.log(np.maximum(prior, 1e-300))
    acc = None
    for net in nets:
        t = _member_t_values(net, y, class_features)
        logw = log_prior[None, :] + t - 1.0
        logw -= logsumexp(logw, axis=1, keepdims=True)
        p = np.exp(logw)
        acc = p if acc is None else acc + p
    post = acc / len(nets)
    return post[0] if single else post


@dataclass(frozen=True)
class GridAxis:
    """One parameter axis: node values, quadrature weights, per-node log prior."""

    values: np.ndarray
    weights: np.ndarray
    log_prior: np.ndarray

    @classmethod
    def from_values(cls, values, log_prior_fn=None) -> "GridAxis":
        v = np.asarray(values, dtype=float)
        if v.size < 2 or np.any(np.diff(v) <= 0):
            raise ValueError("axis values must be strictly increasing")
        w = np.empty_like(v)
        w[1:-1] = (v[2:] - v[:-2]) / 2.0
        w[0] = (v[1] - v[0]) / 2.0
        w[-1] = (v[-1] - v[-2]) / 2.0
        lp = np.zeros_like(v) if log_prior_fn is None else np.asarray(log_prior_fn(v), dtype=float)
        return cls(v, w, lp)

    @classmethod
    def uniform(cls, n: int, lo: float = 0.0, hi: float = 1.0) -> "GridAxis":
        axis = cls.from_values(np.linspace(lo, hi, n))
        return cls(axis.values, axis.weights, np.full(n, -np.log(hi - lo)))

    @classmethod
    def log_spaced(cls, n: int, lo: float, hi: float, log_prior_fn) -> "GridAxis":
        return cls.from_values(np.geomspace(lo, hi, n), log_prior_fn)


@dataclass
class ParamGrid:
    """Tensor-product quadrature grid over a model's parameter space.

    ``model`` selects the network encoding of the nodes; ``None`` feeds raw
    node coordinates to the critic.
    """

    model: ModelKind | None
    axes: tuple
    nodes: np.ndarray = field(init=False)
    encoded: np.ndarray = field(init=False)
    log_weights: np.ndarray = field(init=False)
    log_prior: np.ndarray = field(init=False)

    def __post_init__(self):
        self.axes = tuple(self.axes)
        mesh = np.meshgrid(*[ax.values for ax in self.axes], indexing="ij")
        self.nodes = np.stack([m.reshape(-1) for m in mesh], axis=1)
        self.encoded = (
            self.nodes.copy() if self.model is None else encode_params(self.model, self.nodes)
        )
        logw = np.meshgrid(*[np.log(ax.weights) for ax in self.axes], indexing="ij")
        self.log_weights = np.sum([m.reshape(-1) for m in logw], axis=0)
        logp = np.meshgrid(*[ax.log_prior for ax in self.axes], indexing="ij")
        self.log_prior = np.sum([m.reshape(-1) for m in logp], axis=0)

    @property
    def shape(self) -> tuple:
        return tuple(ax.values.size for ax in self.axes)

    @property
    def n_nodes(self) -> int:
        return self.nodes.shape[0]

    @property
    def weights(self) -> np.ndarray:
        return np.exp(self.log_weights)

    def prior_density(self) -> np.ndarray:
        """The prior itself as a normalized grid density."""
        log_z = logsumexp(self.log_prior + self.log_weights)
        return np.exp(self.log_prior - log_z)

    def integrate(self, density: np.ndarray) -> float:
        return float(np.sum(self.weights * density))

    def marginal(self, density: np.ndarray, axis: int):
        """Integrate out all other axes; returns (values, marginal density)."""
        full = density.reshape(self.shape)
        for other in reversed([i for i in range(len(self.axes)) if i != axis]):
            full = np.tensordot(full, self.axes[other].weights, axes=([other], [0]))
        return self.axes[axis].values, full

    def mean(self, density: np.ndarray) -> np.ndarray:
        w = self.weights * density
        return w @ self.nodes

    def moments(self, density: np.ndarray):
        """Weighted mean vector and covariance matrix of a grid density."""
        w = self.weights * density
        mean = w @ self.nodes
        centered = self.nodes - mean
        cov = (centered * w[:, None]).T @ centered
        return mean, cov


def wslts_grid(n_unit: int = 51, n_temperature: int = 51, temperature_range=(0.05, 20.0)) -> ParamGrid:
    """Default WSLTS grid: uniform axes for the stay/shift probabilities and a
    log-spaced temperature axis weighted by its LogNormal(0, 1) prior."""

    def lognormal_logpdf(x):
        return -np.log(x) - 0.5 * np.log(2 * np.pi) - 0.5 * np.log(x) ** 2

    return ParamGrid(
        ModelKind.WSLTS,
        (
            GridAxis.uniform(n_unit),
            GridAxis.uniform(n_unit),
            GridAxis.log_spaced(n_temperature, *temperature_range, lognormal_logpdf),
        ),
    )


def aeg_grid(n_unit: int = 51) -> ParamGrid:
    return ParamGrid(ModelKind.AEG, (GridAxis.uniform(n_unit), GridAxis.uniform(n_unit)))


def gls_grid(n_unit: int = 11) -> ParamGrid:
    return ParamGrid(ModelKind.GLS, tuple(GridAxis.uniform(n_unit) for _ in range(5)))


def default_grid(model: ModelKind) -> ParamGrid:
    model = ModelKind(model)
    if model == ModelKind.WSLTS:
        return wslts_grid()
    if model == ModelKind.AEG:
        return aeg_grid()
    return gls_grid()


def posterior_density(members, y, grid: ParamGrid) -> np.ndarray:
    """Normalized posterior density on the grid for one observed dataset.

    Per member, prior(theta) * exp(T - 1) is normalized by the grid quadrature
    rule (sum of weight * density = 1); members are averaged afterwards.
    """
    nets = _networks(members)
    v_dim = nets[0].architecture.v_dim
    if grid.encoded.shape[1] != v_dim:
        raise ValueError(
            f"grid has {grid.encoded.shape[1]} parameters, critic expects {v_dim}"
        )
    acc = None
    for net in nets:
        t = _member_t_values(net, y, grid.encoded)[0]
        log_unnorm = grid.log_prior + t - 1.0
        log_z = logsumexp(log_unnorm + grid.log_weights)
        dens = np.exp(log_unnorm - log_z)
        acc = dens if acc is None else acc + dens
    return acc / len(nets)
