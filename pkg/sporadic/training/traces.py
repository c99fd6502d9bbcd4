from __future__ import annotations

from collections.abc import Iterator, Sequence
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import numpy.typing as npt

from ..core.errors import DataFileError, InvalidInputError
from ..core.reports import read_rows, write_rows
from ..data.windows import WindowSet
from ..models.forecaster import Forecast
from ..numeric.ops import RealMatrix

TRACE_HEADER = (
    "window",
    "sensor",
    "target_value",
    "predicted_value",
    "target_gap",
    "predicted_gap",
    "target_mask",
)


@dataclass(frozen=True, eq=False)
class TraceTable:
    """Per-window traces in raw units; every matrix is (windows, D)."""

    window: npt.NDArray[np.int64]
    target_values: RealMatrix
    predicted_values: RealMatrix
    target_gaps: RealMatrix
    predicted_gaps: RealMatrix
    target_masks: RealMatrix

    @classmethod
    def build(
        cls, forecast: Forecast, windows: WindowSet, index: Sequence[int] | npt.ArrayLike | None = None
    ) -> TraceTable:
        idx = np.arange(windows.count) if index is None else np.asarray(index, dtype=np.int64)
        if forecast.values.shape != windows.target_values.shape:
            raise InvalidInputError("forecast does not match the window set")
        return cls(
            window=idx,
            target_values=windows.raw_target_values()[idx],
            predicted_values=forecast.values[idx],
            target_gaps=windows.raw_target_gaps()[idx],
            predicted_gaps=forecast.gaps[idx],
            target_masks=windows.target_masks[idx],
        )


def export_traces(path: Path, traces: TraceTable) -> int:
    """One row per (window, sensor); returns the row count."""
    n_windows, d = traces.target_values.shape

    def rows() -> Iterator[tuple[int, int, float, float, float, float, int]]:
        for k in range(n_windows):
            for s in range(d):
                yield (
                    int(traces.window[k]),
                    s,
                    float(traces.target_values[k, s]),
                    float(traces.predicted_values[k, s]),
                    float(traces.target_gaps[k, s]),
                    float(traces.predicted_gaps[k, s]),
                    int(traces.target_masks[k, s]),
                )

    return write_rows(path, TRACE_HEADER, rows())


def read_traces(path: Path) -> TraceTable:
    header, rows = read_rows(path)
    if tuple(header) != TRACE_HEADER:
        raise DataFileError(str(path), f"unexpected trace header {header}")
    if not rows:
        empty = np.zeros((0, 0))
        return TraceTable(np.zeros(0, dtype=np.int64), empty, empty, empty, empty, empty)
    try:
        table = np.array([[float(c) for c in r] for r in rows])
    except ValueError as e:
        raise DataFileError(str(path), f"malformed trace row: {e}") from e
    d = int(table[:, 1].max()) + 1
    if len(table) % d:
        raise DataFileError(str(path), "trace rows do not form whole windows")
    shaped = table.reshape(-1, d, len(TRACE_HEADER))
    return TraceTable(
        window=shaped[:, 0, 0].astype(np.int64),
        target_values=shaped[:, :, 2],
        predicted_values=shaped[:, :, 3],
        target_gaps=shaped[:, :, 4],
        predicted_gaps=shaped[:, :, 5],
        target_masks=shaped[:, :, 6],
    )
