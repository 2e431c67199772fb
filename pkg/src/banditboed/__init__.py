"""Mutual-information optimal design of multi-armed bandit experiments."""

__version__ = "0.1.0"

from .designs import (
    BlockTrajectory,
    Design,
    ExperimentData,
    load_design,
    sample_baseline_design,
    save_design,
)
from .models import ModelKind, sample_model_indicator, sample_prior
from .simulators import (
    simulate_aeg,
    simulate_experiment,
    simulate_gls,
    simulate_wslts,
)

__all__ = [
    "BlockTrajectory",
    "Design",
    "ExperimentData",
    "ModelKind",
    "load_design",
    "sample_baseline_design",
    "sample_model_indicator",
    "sample_prior",
    "save_design",
    "simulate_aeg",
    "simulate_experiment",
    "simulate_gls",
    "simulate_wslts",
]
