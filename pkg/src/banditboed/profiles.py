"""Run-scale profiles.

The paper profile reproduces the case-study configuration (50k simulations per
design evaluation, full epoch counts, 50-member ensembles, a 400-evaluation
optimization budget). The desk profile shrinks everything to workstation scale
while keeping the same structure.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

from .critic.training import TrainingConfig


@dataclass(frozen=True)
class Profile:
    name: str
    samples: int
    holdout: int
    ensemble_size: int
    bo_budget: int
    bo_initial: int
    n_sims: int
    max_epochs: int | None = None  # cap per-task epoch counts, None = task default


PROFILES = {
    "paper": Profile(
        name="paper",
        samples=50_000,
        holdout=10_000,
        ensemble_size=50,
        bo_budget=400,
        bo_initial=80,
        n_sims=1_000,
    ),
    "desk": Profile(
        name="desk",
        samples=5_000,
        holdout=1_000,
        ensemble_size=5,
        bo_budget=60,
        bo_initial=20,
        n_sims=500,
        max_epochs=100,
    ),
}


def get_profile(name: str) -> Profile:
    try:
        return PROFILES[name]
    except KeyError:
        raise ValueError(f"unknown profile {name!r}; expected one of {sorted(PROFILES)}") from None


def training_config(task, profile: Profile, **overrides) -> TrainingConfig:
    """The task's training configuration scaled to a profile."""
    explicit_epochs = "epochs" in overrides
    overrides.setdefault("holdout", profile.holdout)
    cfg = task.training_config(**overrides)
    if profile.max_epochs is not None and not explicit_epochs:
        cfg = replace(cfg, epochs=min(cfg.epochs, profile.max_epochs))
    return cfg
