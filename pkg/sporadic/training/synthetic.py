"""Synthetic sensor streams with known ground truth.

Sensors report phase-shifted sines around a base temperature, each reading
dropped independently with probability ``missing_rate``. Every timestep keeps
at least one reading so no step is empty.
"""

from __future__ import annotations

from collections.abc import Iterable, Sequence
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import numpy.typing as npt

from ..core.errors import DataFileError, InvalidInputError
from ..data.series import Events
from ..ingest.parser import SensorRecord, format_lab_line
from ..numeric.ops import RealMatrix

# 2004-02-28 00:00:00 UTC, the first day of the lab corpus
CORPUS_START = 1_077_926_400.0


@dataclass(frozen=True, eq=False)
class SyntheticStream:
    times: RealMatrix
    truth: RealMatrix
    mask: npt.NDArray[np.bool_]
    anomalies: npt.NDArray[np.bool_]
    events: Events

    @property
    def n_steps(self) -> int:
        return int(self.times.shape[0])


def sine_stream(
    n_steps: int = 500,
    n_sensors: int = 2,
    missing_rate: float = 0.4,
    seed: int = 0,
    *,
    step: float = 10.0,
    jitter: float = 0.0,
    period_steps: float = 50.0,
    base: float = 20.0,
    amplitude: float = 5.0,
    anomaly_rate: float = 0.0,
    anomaly_value: float = 120.0,
) -> SyntheticStream:
    if n_steps < 1 or n_sensors < 1:
        raise InvalidInputError("need at least one step and one sensor")
    if not 0.0 <= missing_rate < 1.0:
        raise InvalidInputError(f"missing rate must lie in [0, 1), got {missing_rate}")
    if not 0.0 <= jitter < step / 2:
        raise InvalidInputError("jitter must stay below half a step")
    rng = np.random.default_rng(seed)

    times = np.arange(n_steps) * step
    if jitter:
        times = times + rng.uniform(0.0, jitter, n_steps)
    times = times - times[0]
    phase = np.arange(n_sensors) * (np.pi / max(1, n_sensors))
    angle = 2.0 * np.pi * times[:, None] / (period_steps * step) + phase[None, :]
    truth = base + amplitude * np.sin(angle)

    mask = rng.random((n_steps, n_sensors)) >= missing_rate
    empty = np.flatnonzero(~mask.any(axis=1))
    mask[empty, rng.integers(0, n_sensors, size=empty.size)] = True

    anomalies = mask & (rng.random((n_steps, n_sensors)) < anomaly_rate)
    observed = np.where(anomalies, anomaly_value, truth)

    steps, slots = np.nonzero(mask)
    events = Events(
        times=times[steps].astype(np.float64),
        slots=slots.astype(np.int64),
        values=observed[steps, slots].astype(np.float64),
        n_vars=n_sensors,
    )
    return SyntheticStream(times=times, truth=truth, mask=mask, anomalies=anomalies, events=events)


def stream_records(
    stream: SyntheticStream, sensor_ids: Sequence[int] | None = None, start: float = CORPUS_START
) -> list[SensorRecord]:
    """Lab-corpus records carrying the stream as temperatures."""
    ids = list(sensor_ids) if sensor_ids is not None else list(range(1, stream.events.n_vars + 1))
    if len(ids) != stream.events.n_vars:
        raise InvalidInputError("one sensor id per stream variable")
    return [SensorRecord(time=start + t, sensor=ids[d], temperature=v) for t, d, v in stream.events]


def write_lab_file(records: Iterable[SensorRecord], path: Path) -> int:
    """Write records in the corpus line format; returns the line count."""
    lines = [format_lab_line(r, epoch=i) for i, r in enumerate(records)]
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text("\n".join(lines) + ("\n" if lines else ""), encoding="utf-8")
    except OSError as e:
        raise DataFileError(str(path), f"cannot write sensor log: {e}") from e
    return len(lines)
