from .cell import (
    PARAM_NAMES,
    GruParams,
    GruStepCache,
    gru_backward,
    gru_forward,
    gru_sequence_backward,
    gru_sequence_forward,
    init_params,
)
from .checkpoint import load_gru, read_checkpoint, save_gru, write_checkpoint

__all__ = [
    "PARAM_NAMES",
    "GruParams",
    "GruStepCache",
    "init_params",
    "gru_forward",
    "gru_backward",
    "gru_sequence_forward",
    "gru_sequence_backward",
    "save_gru",
    "load_gru",
    "read_checkpoint",
    "write_checkpoint",
]
