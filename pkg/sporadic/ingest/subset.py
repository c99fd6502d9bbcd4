from __future__ import annotations

import logging
import math
from collections.abc import Iterable, Sequence
from pathlib import Path

import numpy as np
import numpy.typing as npt
import pandas as pd

from ..core.errors import (
    DataFileError,
    InsufficientDataError,
    InvalidConfigError,
    InvalidInputError,
)
from ..core.reports import read_rows, write_rows
from ..data.series import Events, SporadicSeries
from ..data.windows import WindowSet
from .parser import MAX_SENSOR_ID, MIN_SENSOR_ID, VARIABLES, SensorRecord, records_to_frame

logger = logging.getLogger(__name__)


def compress_to_seconds(records: pd.DataFrame | Iterable[SensorRecord]) -> pd.DataFrame:
    """Truncate timestamps to whole seconds, keeping each sensor's last report per second.

    Output is sorted by (second, sensor id).
    """
    frame = records if isinstance(records, pd.DataFrame) else records_to_frame(records)
    frame = frame.sort_values(["sensor", "time"], kind="stable").copy()
    frame["time"] = np.floor(frame["time"].to_numpy(np.float64))
    frame = frame.drop_duplicates(["sensor", "time"], keep="last")
    return frame.sort_values(["time", "sensor"], kind="stable").reset_index(drop=True)


def select_subset(frame: pd.DataFrame, sensor_ids: Sequence[int], variable: str) -> Events:
    """Events of ``variable`` for the given sensors; slot i carries ``sensor_ids[i]``.

    Times are shifted so the first retained reading is at 0.
    """
    if not sensor_ids:
        raise InvalidConfigError("sensor id list is empty")
    if variable not in VARIABLES:
        raise InvalidConfigError(f"unknown variable {variable!r}; expected one of {VARIABLES}")
    if len(set(sensor_ids)) != len(sensor_ids):
        raise InvalidConfigError(f"duplicate sensor ids in {list(sensor_ids)}")
    if frame.empty:
        raise InsufficientDataError("no parseable sensor records")
    present = set(frame["sensor"].unique().tolist())
    for sid in sensor_ids:
        if not MIN_SENSOR_ID <= sid <= MAX_SENSOR_ID or sid not in present:
            raise InvalidConfigError(f"unknown sensor id {sid}")

    slot_of = {sid: i for i, sid in enumerate(sensor_ids)}
    picked = frame[frame["sensor"].isin(slot_of) & frame[variable].notna()]
    picked = picked.sort_values(["time", "sensor"], kind="stable")
    if picked.empty:
        raise InsufficientDataError(f"no {variable} readings for sensors {list(sensor_ids)}")
    times = picked["time"].to_numpy(np.float64)
    return Events(
        times=times - times[0],
        slots=picked["sensor"].map(slot_of).to_numpy(np.int64),
        values=picked[variable].to_numpy(np.float64),
        n_vars=len(sensor_ids),
    )


def split_train_test(series: SporadicSeries, test_fraction: float) -> tuple[SporadicSeries, SporadicSeries]:
    """Chronological split; the test side gets the final ceil(fraction * N) steps."""
    if not 0.0 < test_fraction < 1.0:
        raise InvalidConfigError(f"test fraction must lie in (0, 1), got {test_fraction}")
    n = series.length
    # Rounding guards products like 0.3 * 10 = 3.0000000000000004
    n_test = math.ceil(round(test_fraction * n, 9))
    n_train = n - n_test
    if n_train < 1 or n_test < 1:
        raise InsufficientDataError(f"split of {n} steps at {test_fraction} leaves a side empty")
    return series.slice(0, n_train), series.slice(n_train, n)


def apply_cutoff(windows: WindowSet, cutoff: float) -> tuple[WindowSet, npt.NDArray[np.int64]]:
    """Drop windows whose target row has an observed raw value above ``cutoff``.

    Unobserved target entries never cause exclusion.

    Returns:
        (retained windows, their indices in ``windows``)
    """
    if math.isnan(cutoff):
        raise InvalidInputError("cutoff must be a number")
    over = (windows.target_masks > 0) & (windows.raw_target_values() > cutoff)
    kept = np.flatnonzero(~over.any(axis=1))
    if kept.size == 0:
        logger.warning("all windows filtered by cutoff", extra={"cutoff": cutoff})
    return windows.subset(kept), kept


EVENT_HEADER = ("time", "slot", "value")


def write_events(path: Path, events: Events, sensor_ids: Sequence[int] | None = None) -> int:
    """Event cache: CSV ``time,slot,value``; the first line names the slot sensors."""
    header = EVENT_HEADER if sensor_ids is None else (*EVENT_HEADER, *[f"sensor={s}" for s in sensor_ids])
    return write_rows(path, header, ((t, d, v) for t, d, v in events))


def read_events(path: Path) -> tuple[Events, list[int] | None]:
    header, rows = read_rows(path)
    if tuple(header[:3]) != EVENT_HEADER:
        raise DataFileError(str(path), f"unexpected event cache header {header}")
    sensor_ids = [int(h.split("=", 1)[1]) for h in header[3:]] or None
    try:
        events = Events.from_tuples(
            ((float(t), int(d), float(v)) for t, d, v in rows),
            n_vars=len(sensor_ids) if sensor_ids else None,
        )
    except ValueError as e:
        raise DataFileError(str(path), f"malformed event row: {e}") from e
    return events, sensor_ids
