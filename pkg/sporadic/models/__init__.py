from .checkpoint import load_model, save_model
from .forecaster import (
    DenseHead,
    Forecast,
    ForecastModel,
    Variant,
    bilayer_forward,
    forecast_batch,
    init_model,
    model_loss,
    model_objective,
    normalized_outputs,
    persistence_model,
    predict,
    simple_forward,
    velocity_forward,
)

__all__ = [
    "Variant",
    "DenseHead",
    "ForecastModel",
    "Forecast",
    "init_model",
    "persistence_model",
    "simple_forward",
    "bilayer_forward",
    "velocity_forward",
    "forecast_batch",
    "predict",
    "model_loss",
    "model_objective",
    "normalized_outputs",
    "save_model",
    "load_model",
]
