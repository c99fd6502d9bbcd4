"""Masked MAE evaluation, cut-off sweeps and prediction correlations.

Errors are reported in raw units (degrees for values, seconds for gaps) over
target entries with mask 1 in the windows that survive the cut-off.
"""

from __future__ import annotations

import logging
import math
from collections.abc import Sequence

import numpy as np
import numpy.typing as npt
import pandas as pd
from pydantic import BaseModel, Field

from ..core.errors import InsufficientDataError, InvalidConfigError, InvalidInputError
from ..data.windows import WindowSet
from ..ingest.subset import apply_cutoff
from ..models.forecaster import Forecast, ForecastModel, predict
from ..numeric.ops import RealMatrix

logger = logging.getLogger(__name__)

Correlation = list[list[float | None]]


class EvalReport(BaseModel):
    cutoff: float
    value_mae: float | None = Field(default=None, ge=0.0)
    gap_mae: float | None = Field(default=None, ge=0.0)
    retained: int = Field(ge=0)
    windows: int = Field(ge=0)
    observed: int = Field(ge=0)
    per_sensor_value_mae: list[float | None] = Field(default_factory=list)
    per_sensor_gap_mae: list[float | None] = Field(default_factory=list)
    value_correlation: Correlation | None = None
    gap_correlation: Correlation | None = None


def _masked_mae(error: RealMatrix, mask: RealMatrix, axis: int | None = None) -> npt.NDArray[np.float64]:
    present = mask > 0
    total = np.where(present, np.abs(error), 0.0).sum(axis=axis)
    count = present.sum(axis=axis)
    return np.divide(total, count, out=np.full(np.shape(total), np.nan), where=count > 0)


def _optional(x: float) -> float | None:
    return None if math.isnan(x) else float(x)


def correlation_report(predictions: RealMatrix) -> Correlation:
    """Pearson correlation between the columns of a (steps, D) prediction matrix.

    Pairs involving a constant column are None.
    """
    p = np.asarray(predictions, dtype=np.float64)
    if p.ndim != 2:
        raise InvalidInputError(f"predictions must be (steps, D), got {p.shape}")
    if p.shape[0] < 2:
        raise InsufficientDataError("correlation needs at least 2 prediction steps")
    corr = pd.DataFrame(p).corr(method="pearson").to_numpy(np.float64)
    return [[_optional(float(np.clip(v, -1.0, 1.0))) for v in row] for row in corr]


def mean_off_diagonal(corr: Correlation) -> float | None:
    """Mean pairwise correlation, skipping the diagonal and None entries."""
    vals = [v for i, row in enumerate(corr) for j, v in enumerate(row) if i != j and v is not None]
    return float(np.mean(vals)) if vals else None


def report_for(forecast: Forecast, windows: WindowSet, cutoff: float = math.inf) -> EvalReport:
    """EvalReport from precomputed forecasts for every window of ``windows``."""
    if forecast.values.shape != windows.target_values.shape:
        raise InvalidInputError("forecast does not match the window set")
    kept_windows, kept = apply_cutoff(windows, cutoff)
    mask = kept_windows.target_masks
    values, gaps = forecast.values[kept], forecast.gaps[kept]
    value_err = values - kept_windows.raw_target_values()
    gap_err = gaps - kept_windows.raw_target_gaps()
    observed = int(np.count_nonzero(mask > 0))
    report = EvalReport(
        cutoff=float(cutoff),
        value_mae=_optional(float(_masked_mae(value_err, mask))),
        gap_mae=_optional(float(_masked_mae(gap_err, mask))),
        retained=kept_windows.count,
        windows=windows.count,
        observed=observed,
        per_sensor_value_mae=[_optional(float(v)) for v in _masked_mae(value_err, mask, axis=0)],
        per_sensor_gap_mae=[_optional(float(v)) for v in _masked_mae(gap_err, mask, axis=0)],
        value_correlation=correlation_report(values) if kept_windows.count >= 2 else None,
        gap_correlation=correlation_report(gaps) if kept_windows.count >= 2 else None,
    )
    if observed == 0:
        logger.warning("empty evaluation", extra={"cutoff": cutoff, "retained": kept_windows.count})
    return report


def evaluate(model: ForecastModel, windows: WindowSet, cutoff: float = math.inf) -> EvalReport:
    if not windows.normalized:
        raise InvalidInputError("evaluate on windows normalized with training stats")
    return report_for(predict(model, windows), windows, cutoff)


def cutoff_sweep(model: ForecastModel, windows: WindowSet, cutoffs: Sequence[float]) -> list[EvalReport]:
    """One report per cut-off, in the given order; forecasts are computed once."""
    if not cutoffs:
        raise InvalidConfigError("cut-off list is empty")
    if not windows.normalized:
        raise InvalidInputError("evaluate on windows normalized with training stats")
    forecast = predict(model, windows)
    return [report_for(forecast, windows, c) for c in cutoffs]


SWEEP_HEADER = ("cutoff", "retained", "value_mae", "gap_mae")


def sweep_rows(reports: Sequence[EvalReport]) -> list[tuple[float, int, float | None, float | None]]:
    return [(r.cutoff, r.retained, r.value_mae, r.gap_mae) for r in reports]
