from __future__ import annotations

import math
from pathlib import Path

import numpy as np
import pytest

from sporadic.core.errors import InsufficientDataError, InvalidConfigError
from sporadic.data.series import Events, SporadicSeries, build_mask_delta, events_from_series, forward_impute
from sporadic.data.windows import WindowSet, make_windows
from sporadic.ingest.parser import SensorRecord, read_lab_file
from sporadic.ingest.stats import REFERENCE_SUBSET, compare_to_reference, corpus_stats
from sporadic.ingest.subset import (
    apply_cutoff,
    compress_to_seconds,
    read_events,
    select_subset,
    split_train_test,
    write_events,
)


def test_compress_keeps_last_report_per_second() -> None:
    frame = compress_to_seconds(
        [
            SensorRecord(time=10.2, sensor=3, temperature=1.0),
            SensorRecord(time=10.7, sensor=3, temperature=2.0),
            SensorRecord(time=10.5, sensor=1, temperature=5.0),
            SensorRecord(time=10.9, sensor=2, temperature=6.0),
        ]
    )
    assert list(frame["time"]) == [10.0, 10.0, 10.0]
    assert list(frame["sensor"]) == [1, 2, 3]
    assert frame.loc[frame["sensor"] == 3, "temperature"].item() == 2.0


def test_compressed_times_strictly_increase_per_sensor(lab_file: Path) -> None:
    frame = compress_to_seconds(read_lab_file(lab_file)[0])
    for _, group in frame.groupby("sensor"):
        assert np.all(np.diff(group["time"].to_numpy()) > 0)
    assert np.all(frame["time"] == np.floor(frame["time"]))


def test_select_subset_orders_slots_by_id_list(lab_file: Path) -> None:
    frame = compress_to_seconds(read_lab_file(lab_file)[0])
    events = select_subset(frame, [3, 1], "temperature")
    assert events.n_vars == 2
    assert events.times[0] == 0.0
    assert set(events.slots.tolist()) == {0, 1}
    first_three = frame[frame["sensor"] == 3].iloc[0]
    slot0 = events.values[events.slots == 0]
    assert slot0[0] == first_three["temperature"]


@pytest.mark.parametrize(
    ("ids", "variable"),
    [([], "temperature"), ([1, 77], "temperature"), ([1, 1], "temperature"), ([1], "pressure"), ([9], "temperature")],
)
def test_select_subset_rejects_bad_requests(lab_file: Path, ids: list[int], variable: str) -> None:
    frame = compress_to_seconds(read_lab_file(lab_file)[0])
    with pytest.raises(InvalidConfigError):
        select_subset(frame, ids, variable)


def test_select_subset_on_an_empty_log_is_a_data_error(tmp_path: Path) -> None:
    path = tmp_path / "junk.txt"
    path.write_text("garbage\n2004-02-28 00:59:16.02785 2\n", encoding="utf-8")
    frame = compress_to_seconds(read_lab_file(path)[0])
    assert frame.empty
    with pytest.raises(InsufficientDataError):
        select_subset(frame, [1, 2], "temperature")


def _series(n: int) -> SporadicSeries:
    return build_mask_delta([(float(5 * t), t % 2, float(t)) for t in range(n)])


def test_split_is_chronological_partition() -> None:
    series = _series(10)
    train, test = split_train_test(series, 0.3)
    assert (train.length, test.length) == (7, 3)
    assert train.timestamps[0] == 0.0 and test.timestamps[0] == 0.0
    rebuilt = np.concatenate([train.timestamps, test.timestamps + series.timestamps[7]])
    np.testing.assert_array_equal(rebuilt, series.timestamps)
    np.testing.assert_array_equal(np.concatenate([train.mask, test.mask]), series.mask)

    for n in range(2, 40):
        tr, te = split_train_test(_series(n), 0.25)
        assert tr.length + te.length == n
        assert te.length == math.ceil(0.25 * n)


def test_split_errors() -> None:
    with pytest.raises(InvalidConfigError):
        split_train_test(_series(10), 1.0)
    with pytest.raises(InsufficientDataError):
        split_train_test(_series(1), 0.5)


def _cutoff_windows() -> WindowSet:
    series = build_mask_delta(
        [(0.0, 0, 20.0), (0.0, 1, 31.0), (1.0, 0, 29.5), (2.0, 1, 25.0), (3.0, 1, 40.0)]
    )
    return make_windows(forward_impute(series, 0.0), 1)


def test_cutoff_is_mask_aware() -> None:
    ws = _cutoff_windows()
    kept, idx = apply_cutoff(ws, math.inf)
    assert kept.count == ws.count
    kept, idx = apply_cutoff(ws, 30.0)
    # Window 0 targets 29.5 observed and 31.0 carried forward; window 2 observes 40.0
    assert idx.tolist() == [0, 1]
    assert kept.count == 2


def test_cutoff_is_monotone(windows: WindowSet) -> None:
    counts = [apply_cutoff(windows, c)[0].count for c in (15.0, 18.0, 20.0, 22.0, 26.0)]
    assert counts == sorted(counts)


def test_event_cache_round_trip(tmp_path: Path, lab_file: Path) -> None:
    frame = compress_to_seconds(read_lab_file(lab_file)[0])
    events = select_subset(frame, [1, 2, 3, 4], "temperature")
    path = tmp_path / "events.csv"
    assert write_events(path, events, [1, 2, 3, 4]) == len(events)
    back, ids = read_events(path)
    assert ids == [1, 2, 3, 4]
    assert list(back) == list(events)


def test_corpus_stats_and_reference_comparison() -> None:
    events = build_mask_delta([(0.0, 0, 10.0), (10.0, 1, 20.0), (30.0, 0, 30.0)])
    stats = corpus_stats(Events.from_tuples(events_from_series(events), n_vars=2))
    assert stats.timesteps == 3
    assert stats.sensors == 2
    assert stats.variable_mean == pytest.approx(20.0)
    assert stats.mean_gap == pytest.approx(30.0)
    assert stats.observed_fraction == pytest.approx(0.5)

    comparison = compare_to_reference(stats, REFERENCE_SUBSET)
    assert comparison.measured["timesteps"] == 3.0
    assert comparison.relative_divergence["sensors"] == pytest.approx(-0.5)
    assert "last" in comparison.note


def test_sparsity_is_listed_but_not_scored() -> None:
    events = build_mask_delta([(0.0, 0, 10.0), (10.0, 1, 20.0), (30.0, 0, 30.0)])
    stats = corpus_stats(Events.from_tuples(events_from_series(events), n_vars=2))
    comparison = compare_to_reference(stats, REFERENCE_SUBSET)
    assert comparison.reference["sparsity"] == 0.3587
    assert comparison.measured["observed_fraction"] == pytest.approx(0.5)
    assert comparison.relative_divergence["sparsity"] is None
    assert "observed_fraction" not in comparison.relative_divergence
    assert "sparsity" in comparison.sparsity_note
