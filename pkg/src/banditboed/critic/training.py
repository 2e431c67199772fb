"""Critic training against the NWJ mutual-information lower bound."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import torch

from .network import CriticArchitecture, CriticNetwork


class TrainingDiverged(RuntimeError):
    """Raised when the training objective becomes non-finite."""


class EnsembleMemberFailed(RuntimeError):
    def __init__(self, member: int, cause: Exception):
        super().__init__(f"ensemble member {member} failed: {cause}")
        self.member = member


@dataclass
class TrainingConfig:
    """Hyperparameters of one critic training run.

    Defaults follow the case-study configuration: Adam with learning rate 1e-3
    and weight decay 1e-3, a plateau scheduler halving the rate after 25
    stagnant epochs, and a 10k held-out split from a 50k sample budget.
    """

    epochs: int = 200
    learning_rate: float = 1e-3
    weight_decay: float = 1e-3
    batch_size: int = 256
    holdout: int = 10_000
    scheduler_factor: float = 0.5
    scheduler_patience: int = 25
    exponent_clamp: float = 20.0

    def __post_init__(self):
        if self.epochs <= 0 or self.learning_rate <= 0:
            raise ValueError("epochs and learning rate must be positive")
        if self.holdout < 0:
            raise ValueError("holdout must be nonnegative")


@dataclass
class MIEstimate:
    """A mutual-information lower-bound estimate in nats."""

    value: float
    standard_error: float
    n_joint: int
    n_marginal: int
    design: np.ndarray | None = None


@dataclass
class CriticDataset:
    """Paired (v, y) samples simulated at one fixed design."""

    v: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        self.v = np.asarray(self.v, dtype=np.float32)
        self.y = np.asarray(self.y, dtype=np.float32)
        if self.v.shape[0] != self.y.shape[0]:
            raise ValueError("v and y must have the same number of rows")

    def __len__(self) -> int:
        return self.v.shape[0]

    def split(self, holdout: int, seed: int = 0):
        """Random train/held-out split; the held-out part never meets the optimizer."""
        n = len(self)
        if holdout >= n:
            raise ValueError("holdout must be smaller than the dataset")
        perm = np.random.default_rng(seed).permutation(n)
        test, train = perm[:holdout], perm[holdout:]
        return (
            CriticDataset(self.v[train], self.y[train]),
            CriticDataset(self.v[test], self.y[test]),
        )


def _derangement(n: int, rng: np.random.Generator) -> np.ndarray:
    # cyclic shift: decouples v from y with no fixed points
    return np.roll(np.arange(n), int(rng.integers(1, n)))


def nwj_objective(
    critic: CriticNetwork,
    v_joint: torch.Tensor,
    y_joint: torch.Tensor,
    v_marginal: torch.Tensor,
    y_marginal: torch.Tensor,
    exponent_clamp: float = 20.0,
) -> torch.Tensor:
    """NWJ lower bound: E_joint[T] - E_marginal[exp(T - 1)].

    The exponent is clamped from above for numerical stability; the clamp is
    inactive for any critic whose outputs stay in a plausible range.
    """
    if v_joint.shape[0] == 0 or v_marginal.shape[0] == 0:
        raise ValueError("batches must be non-empty")
    t_joint = critic(v_joint, y_joint)
    t_marginal = critic(v_marginal, y_marginal)
    return t_joint.mean() - torch.exp(torch.clamp(t_marginal - 1.0, max=exponent_clamp)).mean()


def estimate_mi(
    critic: CriticNetwork,
    dataset: CriticDataset,
    exponent_clamp: float = 20.0,
    seed: int = 0,
    design: np.ndarray | None = None,
) -> MIEstimate:
    """Evaluate the NWJ bound by sample averages on held-out data.

    The marginal expectation pairs each y with a deranged v from the same set.
    """
    n = len(dataset)
    if n < 2:
        raise ValueError("need at least two held-out samples")
    v = torch.from_numpy(dataset.v)
    y = torch.from_numpy(dataset.y)
    perm = _derangement(n, np.random.default_rng(seed))
    critic.eval()
    with torch.no_grad():
        t_joint = critic(v, y).double()
        t_marg = critic(v[perm], y).double()
        e_marg = torch.exp(torch.clamp(t_marg - 1.0, max=exponent_clamp))
        value = t_joint.mean() - e_marg.mean()
        se = math.sqrt((t_joint.var() / n + e_marg.var() / n).item())
    return MIEstimate(
        value=float(value.item()),
        standard_error=se,
        n_joint=n,
        n_marginal=n,
        design=None if design is None else np.asarray(design, dtype=float),
    )


@dataclass
class TrainedCritic:
    network: CriticNetwork
    validation: MIEstimate
    history: list = field(default_factory=list)
    seed: int = 0


def train_critic(
    architecture: CriticArchitecture,
    config: TrainingConfig,
    dataset: CriticDataset,
    seed: int = 0,
    design: np.ndarray | None = None,
) -> TrainedCritic:
    """Maximize the NWJ bound by Adam on minibatches of (v, y) pairs.

    Deterministic given (architecture, config, dataset, seed). The plateau
    scheduler monitors the validation bound on the held-out split.
    """
    if config.holdout > 0:
        train_set, heldout = dataset.split(config.holdout, seed=seed)
    else:
        train_set, heldout = dataset, dataset
    net = CriticNetwork(architecture, seed=seed)
    opt = torch.optim.Adam(
        net.parameters(), lr=config.learning_rate, weight_decay=config.weight_decay
    )
    sched = torch.optim.lr_scheduler.ReduceLROnPlateau(
        opt, mode="max", factor=config.scheduler_factor, patience=config.scheduler_patience
    )
    rng = np.random.default_rng(seed)
    v = torch.from_numpy(train_set.v)
    y = torch.from_numpy(train_set.y)
    n = len(train_set)
    history = []
    for epoch in range(config.epochs):
        net.train()
        order = rng.permutation(n)
        epoch_obj = 0.0
        n_batches = 0
        for start in range(0, n, config.batch_size):
            idx = order[start : start + config.batch_size]
            if idx.size < 2:
                continue
            bi = torch.from_numpy(idx)
            vb, yb = v[bi], y[bi]
            vm = vb[torch.from_numpy(_derangement(idx.size, rng))]
            obj = nwj_objective(net, vb, yb, vm, yb, config.exponent_clamp)
            loss = -obj
            if not torch.isfinite(loss):
                raise TrainingDiverged(f"non-finite objective at epoch {epoch}")
            opt.zero_grad()
            loss.backward()
            opt.step()
            epoch_obj += float(obj.item())
            n_batches += 1
        val = estimate_mi(net, heldout, config.exponent_clamp, seed=seed, design=design)
        sched.step(val.value)
        history.append(
            {
                "epoch": epoch,
                "train_objective": epoch_obj / max(n_batches, 1),
                "validation_mi": val.value,
                "learning_rate": opt.param_groups[0]["lr"],
            }
        )
    net.eval()
    validation = estimate_mi(net, heldout, config.exponent_clamp, seed=seed, design=design)
    return TrainedCritic(network=net, validation=validation, history=history, seed=seed)


def member_seeds(seed: int, n_members: int) -> list[int]:
    ss = np.random.SeedSequence(seed)
    return [int(child.generate_state(1)[0]) for child in ss.spawn(n_members)]


def train_ensemble(
    architecture: CriticArchitecture,
    config: TrainingConfig,
    dataset: CriticDataset,
    n_members: int,
    seed: int = 0,
    design: np.ndarray | None = None,
) -> list[TrainedCritic]:
    """Train independently initialized critics on the same dataset."""
    if n_members < 1:
        raise ValueError("an ensemble needs at least one member")
    members = []
    for i, member_seed in enumerate(member_seeds(seed, n_members)):
        try:
            members.append(train_critic(architecture, config, dataset, member_seed, design))
        except Exception as exc:
            raise EnsembleMemberFailed(i, exc) from exc
    return members
