from .entropy import differential_entropy, shannon_entropy
from .recovery import (
    ConfusionMatrix,
    EntropyReport,
    ParameterRecoveryResult,
    RecoveryResult,
    map_decision,
    parameter_recovery,
    recovery_study,
)
from .stats import (
    ChiSquareResult,
    CorrelationResult,
    DisentanglementReport,
    WelchResult,
    chi_square_test,
    disentanglement_comparison,
    fisher_z,
    posterior_correlations,
    welch_t_test,
)

__all__ = [
    "ChiSquareResult",
    "ConfusionMatrix",
    "CorrelationResult",
    "DisentanglementReport",
    "EntropyReport",
    "ParameterRecoveryResult",
    "RecoveryResult",
    "WelchResult",
    "chi_square_test",
    "differential_entropy",
    "disentanglement_comparison",
    "fisher_z",
    "map_decision",
    "parameter_recovery",
    "posterior_correlations",
    "recovery_study",
    "shannon_entropy",
    "welch_t_test",
]
