"""Enumerable two-model toy problem with exact MI and posterior oracles.

One block, one trial, two arms. Model 1 always picks arm 1; model 2 picks
uniformly. The outcome space has four elements, so mutual information and
Bayes posteriors are computed by direct summation and serve as ground truth
for the trained estimators.
"""

from __future__ import annotations

import numpy as np

from banditboed.critic.network import CriticArchitecture
from banditboed.critic.training import CriticDataset, TrainingConfig

PRIOR = np.array([0.5, 0.5])


def outcome_table(design) -> np.ndarray:
    """p(y | m) over outcomes (arm, reward), shape (2 models, 2 arms, 2 rewards)."""
    d = np.asarray(design, dtype=float)
    table = np.zeros((2, 2, 2))
    for arm in range(2):
        for reward in range(2):
            lik = d[arm] if reward == 1 else 1.0 - d[arm]
            table[0, arm, reward] = (1.0 if arm == 0 else 0.0) * lik
            table[1, arm, reward] = 0.5 * lik
    return table


def true_mi(design) -> float:
    """Exhaustive-enumeration mutual information in nats."""
    table = outcome_table(design)
    marginal = PRIOR[0] * table[0] + PRIOR[1] * table[1]
    mi = 0.0
    for m in range(2):
        mask = table[m] > 0
        mi += PRIOR[m] * np.sum(table[m][mask] * np.log(table[m][mask] / marginal[mask]))
    return float(mi)


def exact_posterior(design, arm: int, reward: int) -> np.ndarray:
    table = outcome_table(design)
    w = PRIOR * table[:, arm, reward]
    return w / w.sum()


def architecture() -> CriticArchitecture:
    return CriticArchitecture(
        n_blocks=1,
        block_input_dim=2,
        summary_dim=4,
        v_dim=2,
        block_hidden=(32, 16),
        head_hidden=(32, 32),
    )


def training_config(**overrides) -> TrainingConfig:
    cfg = dict(
        epochs=80,
        learning_rate=3e-3,
        weight_decay=1e-5,
        batch_size=1024,
        holdout=5_000,
    )
    cfg.update(overrides)
    return TrainingConfig(**cfg)


def simulate(design, n: int, seed: int):
    """Draw (m, arm, reward) triples from the joint; returns int arrays."""
    rng = np.random.default_rng(seed)
    d = np.asarray(design, dtype=float)
    m = rng.integers(0, 2, size=n)
    arm = np.where(m == 0, 0, rng.integers(0, 2, size=n))
    reward = (rng.uniform(size=n) < d[arm]).astype(np.int64)
    return m, arm, reward


def encode(m, arm, reward) -> tuple[np.ndarray, np.ndarray]:
    v = np.zeros((m.size, 2))
    v[np.arange(m.size), m] = 1.0
    y = np.stack([arm.astype(float), reward.astype(float)], axis=1)
    return v, y


def make_dataset(design, n: int, seed: int) -> CriticDataset:
    v, y = encode(*simulate(design, n, seed))
    return CriticDataset(v, y)


def class_features() -> np.ndarray:
    return np.eye(2)
