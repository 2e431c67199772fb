"""Experimental designs and observed bandit trajectories."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np


@dataclass(frozen=True)
class Design:
    """Per-block Bernoulli reward probabilities, shape (n_blocks, n_arms)."""

    blocks: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.blocks, dtype=float)
        if arr.ndim != 2:
            raise ValueError("design must be a 2-D array of reward probabilities")
        if np.any(arr < 0.0) or np.any(arr > 1.0) or not np.all(np.isfinite(arr)):
            raise ValueError("reward probabilities must lie in [0, 1]")
        object.__setattr__(self, "blocks", arr)

    @property
    def n_blocks(self) -> int:
        return self.blocks.shape[0]

    @property
    def n_arms(self) -> int:
        return self.blocks.shape[1]

    def flatten(self) -> np.ndarray:
        return self.blocks.reshape(-1).copy()

    @classmethod
    def from_flat(cls, values, n_arms: int) -> "Design":
        arr = np.asarray(values, dtype=float)
        if arr.size % n_arms != 0:
            raise ValueError(f"flat design of size {arr.size} is not divisible by {n_arms}")
        return cls(arr.reshape(-1, n_arms))

    def to_lists(self) -> list[list[float]]:
        return [[float(p) for p in row] for row in self.blocks]


def save_design(design: Design, path) -> None:
    """Write a design as a JSON array-of-arrays of probabilities."""
    Path(path).write_text(json.dumps(design.to_lists(), indent=2) + "\n")


def load_design(path) -> Design:
    return Design(np.asarray(json.loads(Path(path).read_text()), dtype=float))


@dataclass(frozen=True)
class BlockTrajectory:
    """One block's observed behavior: 1-based arm choices and binary rewards."""

    actions: np.ndarray
    rewards: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.actions, dtype=np.int64)
        r = np.asarray(self.rewards, dtype=np.int64)
        if a.shape != r.shape or a.ndim != 1:
            raise ValueError("actions and rewards must be 1-D arrays of equal length")
        if a.size and (a.min() < 1):
            raise ValueError("actions are 1-based arm indices")
        if r.size and (r.min() < 0 or r.max() > 1):
            raise ValueError("rewards must be 0 or 1")
        object.__setattr__(self, "actions", a)
        object.__setattr__(self, "rewards", r)

    @property
    def n_trials(self) -> int:
        return self.actions.size


@dataclass(frozen=True)
class ExperimentData:
    """All blocks of one simulated or real participant."""

    blocks: tuple = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(self, "blocks", tuple(self.blocks))

    @property
    def n_blocks(self) -> int:
        return len(self.blocks)


def sample_baseline_design(n_blocks: int, n_arms: int, rng: np.random.Generator) -> Design:
    """Baseline design with every reward probability drawn i.i.d. Beta(2, 2)."""
    return Design(rng.beta(2.0, 2.0, size=(n_blocks, n_arms)))
