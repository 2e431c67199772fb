from .acquisition import expected_improvement, maximize_acquisition
from .explore import LocalOptimum, SliceGrid, find_local_optima, slice_utility
from .gp import GPSurrogate, gp_fit, matern52
from .loop import BOState, OptimizationResult, optimize_design, run_boed

__all__ = [
    "BOState",
    "GPSurrogate",
    "LocalOptimum",
    "OptimizationResult",
    "SliceGrid",
    "expected_improvement",
    "find_local_optima",
    "gp_fit",
    "matern52",
    "maximize_acquisition",
    "optimize_design",
    "run_boed",
    "slice_utility",
]
