"""Enhanced NIRMAL and baseline optimizers with a small numpy benchmark harness."""
from .core import (
    OPTIMIZER_NAMES,
    DimensionError,
    HyperParams,
    NonFiniteError,
    Optimizer,
    OptimizerState,
    StepBreakdown,
    step,
)
from .optimizers import (
    adam_step,
    enhanced_nirmal_step,
    nesterov_lookahead_step,
    nesterov_step,
    nirmal_step,
    sgd_momentum_step,
)

__version__ = "0.1.0"

__all__ = [
    "OPTIMIZER_NAMES",
    "DimensionError",
    "HyperParams",
    "NonFiniteError",
    "Optimizer",
    "OptimizerState",
    "StepBreakdown",
    "step",
    "adam_step",
    "enhanced_nirmal_step",
    "nesterov_lookahead_step",
    "nesterov_step",
    "nirmal_step",
    "sgd_momentum_step",
]
