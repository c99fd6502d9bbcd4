from __future__ import annotations

import numpy as np

from ..core.errors import InvalidInputError
from ..data.windows import WindowSet
from ..models.forecaster import ForecastModel, forecast_batch
from ..numeric.ops import RealMatrix


def sensor_influence(model: ForecastModel, windows: WindowSet, delta: float = 1.0) -> RealMatrix:
    """Cross-sensor sensitivity of the value forecast.

    Entry (i, j) is the mean absolute change of sensor j's forecast (raw units)
    when sensor i's value channel is shifted by ``delta`` normalized units in
    every window row. The last observed values read by the velocity variant
    move by the same amount in raw units.
    """
    if windows.count == 0:
        raise InvalidInputError("influence needs at least one window")
    if delta == 0:
        raise InvalidInputError("delta must be non-zero")
    d = model.n_vars
    base = forecast_batch(model, windows.inputs, windows.last_values).values
    out = np.zeros((d, d))
    for i in range(d):
        inputs = windows.inputs.copy()
        inputs[:, :, i] += delta
        last = windows.last_values.copy()
        last[:, i] += delta * model.stats.value_scale[i]
        shifted = forecast_batch(model, inputs, last).values
        out[i] = np.mean(np.abs(shifted - base), axis=0)
    return out
