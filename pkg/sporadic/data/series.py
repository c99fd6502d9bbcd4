"""Sporadic series: aligned values, observation mask and per-variable time gaps.

For timestamps ``s`` and mask ``m`` the gap matrix follows

    gaps[0, d] = 0
    gaps[t, d] = s[t] - s[t-1] + (1 - m[t-1, d]) * gaps[t-1, d]

so ``gaps[t, d]`` is the time elapsed since variable ``d`` was last seen
before step ``t``.
"""

from __future__ import annotations

from collections.abc import Iterable, Iterator, Sequence
from dataclasses import dataclass

import numpy as np
import numpy.typing as npt
import pandas as pd

from ..core.errors import InsufficientDataError, InvalidInputError
from ..numeric.ops import RealMatrix

Event = tuple[float, int, float]


@dataclass(frozen=True, eq=False)
class Events:
    """Columnar event list: one (time, variable slot, value) per reading."""

    times: RealMatrix
    slots: npt.NDArray[np.int64]
    values: RealMatrix
    n_vars: int

    def __post_init__(self) -> None:
        if not (len(self.times) == len(self.slots) == len(self.values)):
            raise InvalidInputError("event columns differ in length")
        if len(self.slots) and (self.slots.min() < 0 or self.slots.max() >= self.n_vars):
            raise InvalidInputError("event slot out of range")

    @classmethod
    def from_tuples(cls, events: Iterable[Event], n_vars: int | None = None) -> Events:
        rows = list(events)
        times = np.array([e[0] for e in rows], dtype=np.float64)
        slots = np.array([e[1] for e in rows], dtype=np.int64)
        values = np.array([e[2] for e in rows], dtype=np.float64)
        if n_vars is None:
            n_vars = int(slots.max()) + 1 if len(slots) else 1
        return cls(times=times, slots=slots, values=values, n_vars=n_vars)

    def __len__(self) -> int:
        return len(self.times)

    def __iter__(self) -> Iterator[Event]:
        for t, d, v in zip(self.times, self.slots, self.values, strict=True):
            yield float(t), int(d), float(v)

    def deduplicated(self) -> Events:
        """Keep the last reading per (time, slot), ordered by (time, slot)."""
        frame = pd.DataFrame({"time": self.times, "slot": self.slots, "value": self.values})
        frame = frame.drop_duplicates(["time", "slot"], keep="last").sort_values(
            ["time", "slot"], kind="stable"
        )
        return Events(
            times=frame["time"].to_numpy(np.float64),
            slots=frame["slot"].to_numpy(np.int64),
            values=frame["value"].to_numpy(np.float64),
            n_vars=self.n_vars,
        )


@dataclass(frozen=True, eq=False)
class SporadicSeries:
    timestamps: RealMatrix
    values: RealMatrix
    mask: RealMatrix
    gaps: RealMatrix

    def __post_init__(self) -> None:
        for arr in (self.timestamps, self.values, self.mask, self.gaps):
            arr.setflags(write=False)

    @property
    def length(self) -> int:
        return int(self.timestamps.shape[0])

    @property
    def n_vars(self) -> int:
        return int(self.values.shape[1])

    @property
    def is_imputed(self) -> bool:
        return bool(np.all(np.isfinite(self.values)))

    def slice(self, start: int, stop: int) -> SporadicSeries:
        """Sub-series of steps [start, stop), re-anchored so its first timestamp is 0."""
        if not 0 <= start < stop <= self.length:
            raise InsufficientDataError(f"empty slice [{start}, {stop}) of {self.length} steps")
        ts = self.timestamps[start:stop] - self.timestamps[start]
        mask = self.mask[start:stop].copy()
        return SporadicSeries(
            timestamps=ts,
            values=self.values[start:stop].copy(),
            mask=mask,
            gaps=compute_gaps(ts, mask),
        )


def compute_gaps(timestamps: RealMatrix, mask: RealMatrix) -> RealMatrix:
    n, d = mask.shape
    gaps = np.zeros((n, d))
    if n == 0:
        return gaps
    steps = np.diff(timestamps)
    for t in range(1, n):
        gaps[t] = steps[t - 1] + (1.0 - mask[t - 1]) * gaps[t - 1]
    return gaps


def build_mask_delta(
    events: Events | Sequence[Event], n_vars: int | None = None
) -> SporadicSeries:
    """Align time-sorted events into a SporadicSeries.

    Each distinct event time becomes a timestep. Times are shifted so the first
    timestep is 0. Duplicate (time, variable) readings resolve last-wins.
    Unobserved entries of ``values`` hold NaN.
    """
    ev = events if isinstance(events, Events) else Events.from_tuples(events, n_vars)
    if len(ev) == 0:
        raise InsufficientDataError("no events to build a series from")
    if np.any(np.diff(ev.times) < 0):
        raise InvalidInputError("events must be sorted by time")
    if not np.all(np.isfinite(ev.times)) or not np.all(np.isfinite(ev.values)):
        raise InvalidInputError("events contain non-finite times or values")
    d = n_vars if n_vars is not None else ev.n_vars

    stamps, step_of = np.unique(ev.times, return_inverse=True)
    key = step_of * d + ev.slots
    # Index of the last occurrence of every (step, slot) key
    _, rev_first = np.unique(key[::-1], return_index=True)
    last = len(key) - 1 - rev_first

    n = len(stamps)
    values = np.full((n, d), np.nan)
    mask = np.zeros((n, d))
    values[step_of[last], ev.slots[last]] = ev.values[last]
    mask[step_of[last], ev.slots[last]] = 1.0

    ts = stamps - stamps[0]
    return SporadicSeries(timestamps=ts, values=values, mask=mask, gaps=compute_gaps(ts, mask))


def events_from_series(series: SporadicSeries) -> list[Event]:
    """Emit (s_t, d, x_t^d) for every observed entry, in (time, slot) order."""
    steps, slots = np.nonzero(series.mask > 0)
    return [
        (float(series.timestamps[t]), int(d), float(series.values[t, d]))
        for t, d in zip(steps, slots, strict=True)
    ]


def forward_impute(
    series: SporadicSeries, fallback: float | npt.ArrayLike = 0.0
) -> SporadicSeries:
    """Fill every unobserved entry with the variable's most recent observation.

    Entries before a variable's first observation take ``fallback`` (scalar or
    one value per variable). Observed entries are left untouched.
    """
    observed = np.where(series.mask > 0, series.values, np.nan)
    filled = pd.DataFrame(observed).ffill().to_numpy(np.float64)
    fill = np.broadcast_to(np.asarray(fallback, dtype=np.float64), (series.n_vars,))
    filled = np.where(np.isnan(filled), fill, filled)
    return SporadicSeries(
        timestamps=series.timestamps.copy(),
        values=filled,
        mask=series.mask.copy(),
        gaps=series.gaps.copy(),
    )


def zero_impute(series: SporadicSeries) -> SporadicSeries:
    """Replace every unobserved entry with 0, the no-imputation ablation."""
    return SporadicSeries(
        timestamps=series.timestamps.copy(),
        values=np.where(series.mask > 0, series.values, 0.0),
        mask=series.mask.copy(),
        gaps=series.gaps.copy(),
    )


def observed_fraction(series: SporadicSeries) -> float:
    """Share of observed entries, sum(m) / (N * D)."""
    return float(series.mask.sum()) / float(series.mask.size)


def observed_means(series: SporadicSeries) -> RealMatrix:
    """Per-variable mean of observed values; 0 for a variable never observed."""
    counts = series.mask.sum(axis=0)
    sums = np.where(series.mask > 0, series.values, 0.0).sum(axis=0)
    return np.divide(sums, counts, out=np.zeros_like(sums), where=counts > 0)
