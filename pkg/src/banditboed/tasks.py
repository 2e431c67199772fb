"""Inference tasks of the bandit case study.

A task bundles what varies between model discrimination and parameter
estimation: the variable of interest and its prior, the simulator call, the
feature encodings, and the critic architecture sized for the task.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .critic.encoding import encode_batch, encode_params, one_hot
from .critic.network import CriticArchitecture
from .critic.posterior import ParamGrid, default_grid, posterior_density, posterior_discrete
from .critic.training import CriticDataset, TrainingConfig
from .designs import Design
from .models import MODEL_PRIOR, ModelKind, N_PARAMS, sample_prior
from .simulators import simulate_experiment_batch

_PE_SUMMARY_DIM = {ModelKind.WSLTS: 8, ModelKind.AEG: 6, ModelKind.GLS: 8}
_PE_EPOCHS = {ModelKind.WSLTS: 400, ModelKind.AEG: 300, ModelKind.GLS: 300}
_PE_WEIGHT_DECAY = {ModelKind.WSLTS: 1e-4, ModelKind.AEG: 1e-3, ModelKind.GLS: 1e-3}


@dataclass(frozen=True)
class SimulatedSet:
    """A simulated training set plus the ground truth that generated it."""

    dataset: CriticDataset
    models: np.ndarray
    thetas: np.ndarray


@dataclass(frozen=True)
class ModelDiscriminationTask:
    """Which of the three candidate models generated the behavior?"""

    n_blocks: int = 2
    n_arms: int = 3
    n_trials: int = 30

    name = "md"

    @property
    def design_dim(self) -> int:
        return self.n_blocks * self.n_arms

    @property
    def v_dim(self) -> int:
        return 3

    def architecture(self) -> CriticArchitecture:
        return CriticArchitecture(
            n_blocks=self.n_blocks,
            block_input_dim=2 * self.n_trials,
            summary_dim=6,
            v_dim=self.v_dim,
            block_hidden=(64, 32),
            head_hidden=(32, 32),
        )

    def training_config(self, samples_unused=None, **overrides) -> TrainingConfig:
        cfg = {"epochs": 200, "weight_decay": 1e-3}
        cfg.update(overrides)
        return TrainingConfig(**cfg)

    def prior(self) -> np.ndarray:
        return MODEL_PRIOR.copy()

    def class_features(self) -> np.ndarray:
        return np.eye(3)

    def sample_dataset(self, design: Design, n: int, seed: int) -> SimulatedSet:
        self._check_design(design)
        rng = np.random.default_rng(seed)
        models = rng.integers(1, 4, size=n).astype(np.int64)
        thetas = np.zeros((n, 5))
        for kind in ModelKind:
            idx = np.flatnonzero(models == kind)
            if idx.size:
                thetas[idx, : N_PARAMS[kind]] = sample_prior(kind, rng, size=idx.size)
        theta_rows = [thetas[i, : N_PARAMS[ModelKind(int(models[i]))]] for i in range(n)]
        actions, rewards = simulate_experiment_batch(
            models, theta_rows, design, self.n_trials, seed
        )
        dataset = CriticDataset(one_hot(models, 3), encode_batch(actions, rewards, self.n_arms))
        return SimulatedSet(dataset=dataset, models=models, thetas=thetas)

    def encode_data(self, actions, rewards) -> np.ndarray:
        return encode_batch(actions, rewards, self.n_arms)

    def posterior(self, members, y) -> np.ndarray:
        return posterior_discrete(members, y, self.class_features(), self.prior())

    def _check_design(self, design: Design) -> None:
        if design.n_blocks != self.n_blocks or design.n_arms != self.n_arms:
            raise ValueError(
                f"{self.name} expects a {self.n_blocks}x{self.n_arms} design, "
                f"got {design.n_blocks}x{design.n_arms}"
            )


@dataclass(frozen=True)
class ParameterEstimationTask:
    """What are a fixed model's parameters?"""

    model: ModelKind
    n_blocks: int = 3
    n_arms: int = 3
    n_trials: int = 30

    @property
    def name(self) -> str:
        return f"pe-{ModelKind(self.model).name.lower()}"

    @property
    def design_dim(self) -> int:
        return self.n_blocks * self.n_arms

    @property
    def v_dim(self) -> int:
        return N_PARAMS[ModelKind(self.model)]

    def architecture(self) -> CriticArchitecture:
        return CriticArchitecture(
            n_blocks=self.n_blocks,
            block_input_dim=2 * self.n_trials,
            summary_dim=_PE_SUMMARY_DIM[ModelKind(self.model)],
            v_dim=self.v_dim,
            block_hidden=(64, 32),
            head_hidden=(64, 32),
        )

    def training_config(self, samples_unused=None, **overrides) -> TrainingConfig:
        cfg = {
            "epochs": _PE_EPOCHS[ModelKind(self.model)],
            "weight_decay": _PE_WEIGHT_DECAY[ModelKind(self.model)],
        }
        cfg.update(overrides)
        return TrainingConfig(**cfg)

    def grid(self) -> ParamGrid:
        return default_grid(self.model)

    def sample_dataset(self, design: Design, n: int, seed: int) -> SimulatedSet:
        self._check_design(design)
        rng = np.random.default_rng(seed)
        kind = ModelKind(self.model)
        thetas = sample_prior(kind, rng, size=n)
        models = np.full(n, int(kind), dtype=np.int64)
        actions, rewards = simulate_experiment_batch(
            models, thetas, design, self.n_trials, seed
        )
        dataset = CriticDataset(
            encode_params(kind, thetas), encode_batch(actions, rewards, self.n_arms)
        )
        return SimulatedSet(dataset=dataset, models=models, thetas=thetas)

    def encode_data(self, actions, rewards) -> np.ndarray:
        return encode_batch(actions, rewards, self.n_arms)

    def posterior(self, members, y, grid: ParamGrid | None = None) -> np.ndarray:
        return posterior_density(members, y, grid if grid is not None else self.grid())

    def _check_design(self, design: Design) -> None:
        if design.n_blocks != self.n_blocks or design.n_arms != self.n_arms:
            raise ValueError(
                f"{self.name} expects a {self.n_blocks}x{self.n_arms} design, "
                f"got {design.n_blocks}x{design.n_arms}"
            )


TASK_NAMES = ("md", "pe-wslts", "pe-aeg", "pe-gls")


def get_task(name: str):
    name = name.lower()
    if name == "md":
        return ModelDiscriminationTask()
    if name.startswith("pe-"):
        try:
            kind = ModelKind[name[3:].upper()]
        except KeyError:
            raise ValueError(f"unknown task {name!r}; expected one of {TASK_NAMES}") from None
        return ParameterEstimationTask(model=kind)
    raise ValueError(f"unknown task {name!r}; expected one of {TASK_NAMES}")


# reference designs reported for the case study
MD_OPTIMAL_DESIGN = Design(np.array([[0.0, 0.0, 0.6], [1.0, 1.0, 0.0]]))
PE_WSLTS_OPTIMAL_DESIGN = Design(np.array([[0.0, 1.0, 0.0], [0.0, 1.0, 1.0], [1.0, 0.0, 1.0]]))
