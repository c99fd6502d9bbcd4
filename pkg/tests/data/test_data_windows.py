from __future__ import annotations

from pathlib import Path

import numpy as np
import pytest

from sporadic.core.errors import InsufficientDataError, InvalidInputError
from sporadic.data.series import SporadicSeries, build_mask_delta, forward_impute
from sporadic.data.windows import (
    SCALE_FLOOR,
    WindowSet,
    apply_normalization,
    denormalize,
    denormalize_gaps,
    denormalize_values,
    fit_normalization,
    make_windows,
    read_windows,
    write_windows,
)


def _imputed(rng: np.random.Generator, n: int, d: int) -> SporadicSeries:
    events = []
    for t in range(n):
        slots = np.flatnonzero(rng.random(d) < 0.5)
        if slots.size == 0:
            slots = np.array([int(rng.integers(0, d))])
        events.extend((float(3 * t + rng.integers(0, 2)), int(s), float(rng.normal())) for s in slots)
    events.sort(key=lambda e: e[0])
    return forward_impute(build_mask_delta(events, n_vars=d), 0.0)


def test_window_layout_and_targets() -> None:
    events = [(float(t), t % 2, float(10 + t)) for t in range(5)]
    series = forward_impute(build_mask_delta(events), 0.0)
    ws = make_windows(series, 2)
    assert ws.count == 3
    assert ws.inputs.shape == (3, 2, 6)
    np.testing.assert_array_equal(ws.target_values, series.values[2:])
    np.testing.assert_array_equal(ws.target_gaps, series.gaps[2:])
    np.testing.assert_array_equal(ws.target_masks, series.mask[2:])
    np.testing.assert_array_equal(ws.last_values, series.values[1:4])
    for k in range(3):
        for t in range(2):
            np.testing.assert_array_equal(ws.inputs[k, t, 2:4], series.mask[k + t])

    assert make_windows(series, 4).count == 1
    with pytest.raises(InsufficientDataError):
        make_windows(series, 5)


def test_window_properties_hold_on_random_series(rng: np.random.Generator) -> None:
    for _ in range(200):
        n, d = int(rng.integers(2, 40)), int(rng.integers(1, 5))
        series = _imputed(rng, n, d)
        ar = int(rng.integers(1, series.length))
        ws = make_windows(series, ar)
        assert ws.count == series.length - ar
        if ws.count > 1:
            np.testing.assert_array_equal(ws.inputs[1:, :-1], ws.inputs[:-1, 1:])
        middle = ws.inputs[:, :, d : 2 * d]
        assert np.all((middle == 0.0) | (middle == 1.0))
        for k in range(ws.count):
            np.testing.assert_array_equal(ws.inputs[k, :, :d], series.values[k : k + ar])
            np.testing.assert_array_equal(ws.inputs[k, :, 2 * d :], series.gaps[k : k + ar])


def test_make_windows_requires_imputation() -> None:
    raw = build_mask_delta([(0.0, 0, 1.0), (1.0, 1, 2.0), (2.0, 0, 3.0)])
    with pytest.raises(InvalidInputError):
        make_windows(raw, 1)
    with pytest.raises(InvalidInputError):
        make_windows(forward_impute(raw), 0)


def test_normalization_round_trip_and_mask_untouched(rng: np.random.Generator) -> None:
    raw = make_windows(_imputed(rng, 60, 3), 5)
    stats = fit_normalization(raw)
    norm = apply_normalization(raw, stats)
    np.testing.assert_array_equal(norm.inputs[:, :, 3:6], raw.inputs[:, :, 3:6])
    back = denormalize(norm)
    assert np.max(np.abs(back.inputs - raw.inputs)) < 1e-10
    assert np.max(np.abs(back.target_values - raw.target_values)) < 1e-10
    assert np.max(np.abs(denormalize_gaps(norm.target_gaps, stats) - raw.target_gaps)) < 1e-10
    np.testing.assert_array_equal(norm.last_values, raw.last_values)
    with pytest.raises(InvalidInputError):
        apply_normalization(norm, stats)


def test_constant_column_normalizes_to_zero() -> None:
    events = [(float(t), 0, 5.0) for t in range(8)]
    raw = make_windows(forward_impute(build_mask_delta(events)), 3)
    stats = fit_normalization(raw)
    assert stats.value_scale[0] == SCALE_FLOOR
    norm = apply_normalization(raw, stats)
    assert np.all(norm.inputs[:, :, 0] == 0.0)
    np.testing.assert_allclose(denormalize_values(norm.target_values, stats), raw.target_values)


def test_training_stats_reused_on_test_windows(rng: np.random.Generator) -> None:
    series = _imputed(rng, 80, 2)
    train, test = series.slice(0, 56), series.slice(56, 80)
    stats = fit_normalization(make_windows(train, 4))
    test_windows = apply_normalization(make_windows(test, 4), stats)
    assert test_windows.stats is stats


def test_window_export_reconstructs_arrays(tmp_path: Path, windows: WindowSet) -> None:
    small = windows.subset(np.arange(5))
    path = tmp_path / "windows.csv"
    write_windows(path, small)
    back = read_windows(path, small.ar, small.n_vars)
    for name in ("inputs", "target_values", "target_gaps", "target_masks", "last_values"):
        np.testing.assert_array_equal(getattr(back, name), getattr(small, name))
    assert back.stats is not None and small.stats is not None
    np.testing.assert_array_equal(back.stats.value_scale, small.stats.value_scale)
