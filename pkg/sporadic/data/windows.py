"""AR-step training windows with next-step targets, and their normalization.

Every input row is the concatenation ``[x; m; gaps]`` of one timestep, so a
window has shape ``(AR, 3D)``: columns ``[0, D)`` hold values, ``[D, 2D)`` the
mask and ``[2D, 3D)`` the gaps.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from pathlib import Path
from typing import Any

import numpy as np
import numpy.typing as npt

from ..core.errors import DataFileError, InsufficientDataError, InvalidInputError
from ..core.reports import read_rows, write_rows
from ..numeric.ops import RealMatrix
from .series import SporadicSeries

SCALE_FLOOR = 1e-8


@dataclass(frozen=True, eq=False)
class NormalizationStats:
    value_mean: RealMatrix
    value_scale: RealMatrix
    gap_mean: RealMatrix
    gap_scale: RealMatrix

    @property
    def n_vars(self) -> int:
        return int(self.value_mean.shape[0])

    @classmethod
    def identity(cls, n_vars: int) -> NormalizationStats:
        return cls(np.zeros(n_vars), np.ones(n_vars), np.zeros(n_vars), np.ones(n_vars))

    def arrays(self) -> dict[str, RealMatrix]:
        return {
            "value_mean": self.value_mean,
            "value_scale": self.value_scale,
            "gap_mean": self.gap_mean,
            "gap_scale": self.gap_scale,
        }

    def to_dict(self) -> dict[str, list[float]]:
        return {k: [float(x) for x in v] for k, v in self.arrays().items()}

    @classmethod
    def from_arrays(cls, arrays: dict[str, Any]) -> NormalizationStats:
        return cls(**{k: np.asarray(arrays[k], dtype=np.float64) for k in cls.__dataclass_fields__})


@dataclass(frozen=True, eq=False)
class WindowSet:
    inputs: RealMatrix
    target_values: RealMatrix
    target_gaps: RealMatrix
    target_masks: RealMatrix
    # Raw value of each variable at the last window row (velocity baseline)
    last_values: RealMatrix
    ar: int
    stats: NormalizationStats | None = None

    def __post_init__(self) -> None:
        k = self.inputs.shape[0]
        for arr in (self.target_values, self.target_gaps, self.target_masks, self.last_values):
            if arr.shape != (k, self.n_vars):
                raise InvalidInputError(f"target shape {arr.shape} != ({k}, {self.n_vars})")

    @property
    def count(self) -> int:
        return int(self.inputs.shape[0])

    @property
    def n_vars(self) -> int:
        return int(self.inputs.shape[2] // 3)

    @property
    def normalized(self) -> bool:
        return self.stats is not None

    def subset(self, index: npt.ArrayLike) -> WindowSet:
        idx = np.asarray(index)
        return replace(
            self,
            inputs=self.inputs[idx],
            target_values=self.target_values[idx],
            target_gaps=self.target_gaps[idx],
            target_masks=self.target_masks[idx],
            last_values=self.last_values[idx],
        )

    def raw_target_values(self) -> RealMatrix:
        return self.target_values if self.stats is None else denormalize_values(self.target_values, self.stats)

    def raw_target_gaps(self) -> RealMatrix:
        return self.target_gaps if self.stats is None else denormalize_gaps(self.target_gaps, self.stats)


def make_windows(series: SporadicSeries, ar: int) -> WindowSet:
    """Slice an imputed series into overlapping AR-step windows.

    Window k covers steps k..k+AR-1 and targets step k+AR, so a series of N
    steps yields N - AR windows.
    """
    if ar < 1:
        raise InvalidInputError(f"AR must be >= 1, got {ar}")
    n = series.length
    if n <= ar:
        raise InsufficientDataError(f"need more than AR={ar} steps, got {n}")
    if not series.is_imputed:
        raise InvalidInputError("series must be imputed before windowing")

    rows = np.concatenate([series.values, series.mask, series.gaps], axis=1)
    view = np.lib.stride_tricks.sliding_window_view(rows, ar, axis=0)
    inputs = np.ascontiguousarray(view[: n - ar].transpose(0, 2, 1))
    return WindowSet(
        inputs=inputs,
        target_values=series.values[ar:].copy(),
        target_gaps=series.gaps[ar:].copy(),
        target_masks=series.mask[ar:].copy(),
        last_values=series.values[ar - 1 : n - 1].copy(),
        ar=ar,
    )


def fit_normalization(windows: WindowSet) -> NormalizationStats:
    """Per-variable mean and scale of the value and gap channels."""
    if windows.normalized:
        raise InvalidInputError("fit normalization on raw windows")
    if windows.count == 0:
        raise InsufficientDataError("cannot fit normalization on zero windows")
    d = windows.n_vars
    rows = windows.inputs.reshape(-1, 3 * d)
    values, gaps = rows[:, :d], rows[:, 2 * d :]
    return NormalizationStats(
        value_mean=values.mean(axis=0),
        value_scale=np.maximum(values.std(axis=0), SCALE_FLOOR),
        gap_mean=gaps.mean(axis=0),
        gap_scale=np.maximum(gaps.std(axis=0), SCALE_FLOOR),
    )


def normalize_values(values: RealMatrix, stats: NormalizationStats) -> RealMatrix:
    return (values - stats.value_mean) / stats.value_scale


def normalize_gaps(gaps: RealMatrix, stats: NormalizationStats) -> RealMatrix:
    return (gaps - stats.gap_mean) / stats.gap_scale


def denormalize_values(values: RealMatrix, stats: NormalizationStats) -> RealMatrix:
    return values * stats.value_scale + stats.value_mean


def denormalize_gaps(gaps: RealMatrix, stats: NormalizationStats) -> RealMatrix:
    return gaps * stats.gap_scale + stats.gap_mean


def apply_normalization(windows: WindowSet, stats: NormalizationStats) -> WindowSet:
    """Standardize value and gap channels; the mask channel is untouched."""
    if windows.normalized:
        raise InvalidInputError("windows are already normalized")
    d = windows.n_vars
    if stats.n_vars != d:
        raise InvalidInputError(f"stats cover {stats.n_vars} variables, windows {d}")
    inputs = windows.inputs.copy()
    inputs[..., :d] = normalize_values(inputs[..., :d], stats)
    inputs[..., 2 * d :] = normalize_gaps(inputs[..., 2 * d :], stats)
    return replace(
        windows,
        inputs=inputs,
        target_values=normalize_values(windows.target_values, stats),
        target_gaps=normalize_gaps(windows.target_gaps, stats),
        stats=stats,
    )


def denormalize(windows: WindowSet) -> WindowSet:
    """Inverse of ``apply_normalization``."""
    if windows.stats is None:
        return windows
    stats, d = windows.stats, windows.n_vars
    inputs = windows.inputs.copy()
    inputs[..., :d] = denormalize_values(inputs[..., :d], stats)
    inputs[..., 2 * d :] = denormalize_gaps(inputs[..., 2 * d :], stats)
    return replace(
        windows,
        inputs=inputs,
        target_values=denormalize_values(windows.target_values, stats),
        target_gaps=denormalize_gaps(windows.target_gaps, stats),
        stats=None,
    )


WINDOW_HEADER = ("window", "row", "kind", "channel", "value")
_TARGET_KINDS = ("target_value", "target_gap", "target_mask", "last_value")


def write_windows(path: Path, windows: WindowSet) -> int:
    """Export windows as long-format CSV, one record per scalar.

    Normalization stats, when present, are written as window -1 records.
    """

    def rows() -> Any:
        for k in range(windows.count):
            for t in range(windows.ar):
                for c in range(windows.inputs.shape[2]):
                    yield (k, t, "input", c, float(windows.inputs[k, t, c]))
            targets = (
                windows.target_values,
                windows.target_gaps,
                windows.target_masks,
                windows.last_values,
            )
            for kind, arr in zip(_TARGET_KINDS, targets, strict=True):
                for c in range(windows.n_vars):
                    yield (k, 0, kind, c, float(arr[k, c]))
        if windows.stats is not None:
            for kind, arr in windows.stats.arrays().items():
                for c, v in enumerate(arr):
                    yield (-1, 0, kind, c, float(v))

    return write_rows(path, WINDOW_HEADER, rows())


def read_windows(path: Path, ar: int, n_vars: int) -> WindowSet:
    header, rows = read_rows(path)
    if tuple(header) != WINDOW_HEADER:
        raise DataFileError(str(path), f"unexpected window header {header}")
    count = 1 + max((int(r[0]) for r in rows), default=-1)
    inputs = np.zeros((count, ar, 3 * n_vars))
    targets = {kind: np.zeros((count, n_vars)) for kind in _TARGET_KINDS}
    stats: dict[str, RealMatrix] = {}
    for window, row, kind, channel, value in rows:
        k, t, c, v = int(window), int(row), int(channel), float(value)
        if kind == "input":
            inputs[k, t, c] = v
        elif kind in targets:
            targets[kind][k, c] = v
        else:
            stats.setdefault(kind, np.zeros(n_vars))[c] = v
    return WindowSet(
        inputs=inputs,
        target_values=targets["target_value"],
        target_gaps=targets["target_gap"],
        target_masks=targets["target_mask"],
        last_values=targets["last_value"],
        ar=ar,
        stats=NormalizationStats.from_arrays(stats) if stats else None,
    )
