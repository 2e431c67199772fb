from .encoding import (
    decode_experiment,
    encode_batch,
    encode_experiment,
    encode_params,
    one_hot,
)
from .network import CriticArchitecture, CriticNetwork, load_critic, save_critic
from .posterior import GridAxis, ParamGrid, posterior_density, posterior_discrete
from .training import (
    CriticDataset,
    MIEstimate,
    TrainedCritic,
    TrainingConfig,
    TrainingDiverged,
    estimate_mi,
    nwj_objective,
    train_critic,
    train_ensemble,
)

__all__ = [
    "CriticArchitecture",
    "CriticDataset",
    "CriticNetwork",
    "GridAxis",
    "MIEstimate",
    "ParamGrid",
    "TrainedCritic",
    "TrainingConfig",
    "TrainingDiverged",
    "decode_experiment",
    "encode_batch",
    "encode_experiment",
    "encode_params",
    "estimate_mi",
    "load_critic",
    "nwj_objective",
    "one_hot",
    "posterior_density",
    "posterior_discrete",
    "save_critic",
    "train_critic",
    "train_ensemble",
]
