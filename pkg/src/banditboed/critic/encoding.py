"""Feature encodings mapping trajectories and inference targets to network inputs."""

from __future__ import annotations

import numpy as np

from ..designs import BlockTrajectory, ExperimentData
from ..models import ModelKind


def encode_block(actions, rewards, n_arms: int) -> np.ndarray:
    """Encode one block as [scaled actions..., rewards...].

    Actions (1-based) are mapped linearly onto [0, 1] via (a - 1) / (K - 1);
    rewards pass through unchanged.
    """
    a = np.asarray(actions, dtype=float)
    r = np.asarray(rewards, dtype=float)
    return np.concatenate([(a - 1.0) / (n_arms - 1.0), r])


def encode_experiment(data: ExperimentData, n_arms: int) -> np.ndarray:
    """Concatenate the block encodings of a participant's data."""
    return np.concatenate(
        [encode_block(b.actions, b.rewards, n_arms) for b in data.blocks]
    )


def encode_batch(actions: np.ndarray, rewards: np.ndarray, n_arms: int) -> np.ndarray:
    """Encode (n, B, T) action/reward arrays into (n, B * 2T) features."""
    n = actions.shape[0]
    scaled = (actions.astype(float) - 1.0) / (n_arms - 1.0)
    per_block = np.concatenate([scaled, rewards.astype(float)], axis=2)
    return per_block.reshape(n, -1)


def decode_experiment(features, n_blocks: int, n_trials: int, n_arms: int) -> ExperimentData:
    """Invert :func:`encode_experiment` back to integer actions and rewards."""
    vec = np.asarray(features, dtype=float)
    if vec.size != n_blocks * 2 * n_trials:
        raise ValueError("feature length does not match the block layout")
    blocks = []
    for b in range(n_blocks):
        seg = vec[b * 2 * n_trials : (b + 1) * 2 * n_trials]
        actions = np.rint(seg[:n_trials] * (n_arms - 1.0) + 1.0).astype(np.int64)
        rewards = np.rint(seg[n_trials:]).astype(np.int64)
        blocks.append(BlockTrajectory(actions, rewards))
    return ExperimentData(tuple(blocks))


def one_hot(indices, n_classes: int) -> np.ndarray:
    """One-hot encode 1-based class indices."""
    idx = np.asarray(indices, dtype=np.int64).reshape(-1)
    out = np.zeros((idx.size, n_classes))
    out[np.arange(idx.size), idx - 1] = 1.0
    return out


def encode_params(model: ModelKind, theta) -> np.ndarray:
    """Network encoding of a parameter vector; the WSLTS temperature enters in log."""
    arr = np.atleast_2d(np.asarray(theta, dtype=float)).copy()
    if ModelKind(model) == ModelKind.WSLTS:
        arr[:, 2] = np.log(arr[:, 2])
    return arr
