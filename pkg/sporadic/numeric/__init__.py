from .gradcheck import finite_diff_gradcheck, relative_error
from .ops import (
    DEFAULT_HUBER_THRESHOLD,
    RealMatrix,
    as_real,
    huber,
    masked_huber_loss,
    sigmoid,
    tanh,
)
from .optim import OptimizerKind, OptimizerState, clip_grad_norm, optimizer_step

__all__ = [
    "DEFAULT_HUBER_THRESHOLD",
    "RealMatrix",
    "as_real",
    "huber",
    "masked_huber_loss",
    "sigmoid",
    "tanh",
    "OptimizerKind",
    "OptimizerState",
    "optimizer_step",
    "clip_grad_norm",
    "finite_diff_gradcheck",
    "relative_error",
]
