"""Glue from a RunConfig to normalized train/test windows and a fitted model."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from enum import StrEnum

from ..core.errors import InvalidConfigError
from ..data.series import Events, SporadicSeries, build_mask_delta, forward_impute, observed_means, zero_impute
from ..data.windows import (
    NormalizationStats,
    WindowSet,
    apply_normalization,
    fit_normalization,
    make_windows,
)
from ..ingest.parser import read_lab_file
from ..ingest.subset import compress_to_seconds, read_events, select_subset, split_train_test
from ..models.forecaster import ForecastModel, init_model
from .config import RunConfig, TrainConfig
from .trainer import TrainResult, train

logger = logging.getLogger(__name__)


class Imputation(StrEnum):
    FORWARD = "forward"
    # Unobserved entries stay 0, the no-imputation ablation
    ZERO = "zero"


@dataclass(frozen=True, eq=False)
class PreparedData:
    train: WindowSet
    test: WindowSet
    stats: NormalizationStats
    series: SporadicSeries


def load_events(config: RunConfig) -> Events:
    """Events from the configured cache when present, else from the sensor log."""
    cache = config.events_cache
    if cache is not None and cache.exists():
        events, sensor_ids = read_events(cache)
        if sensor_ids is not None and sensor_ids != config.sensor_ids:
            raise InvalidConfigError(f"event cache holds sensors {sensor_ids}, config asks for {config.sensor_ids}")
        logger.info("events loaded from cache", extra={"path": str(cache), "events": len(events)})
        return events
    if config.data_path is None:
        raise InvalidConfigError("no data path or event cache configured")
    records, _ = read_lab_file(config.data_path)
    return select_subset(compress_to_seconds(records), config.sensor_ids, config.variable)


def prepare(
    series: SporadicSeries,
    *,
    ar: int,
    test_fraction: float,
    imputation: Imputation = Imputation.FORWARD,
    stats: NormalizationStats | None = None,
) -> PreparedData:
    """Impute, split chronologically, window, and normalize with training stats.

    Forward imputation runs over the whole series so the first test steps carry
    the last training observation; variables unseen so far fall back to their
    training-split observed mean.
    """
    train_raw, _ = split_train_test(series, test_fraction)
    if imputation is Imputation.FORWARD:
        imputed = forward_impute(series, observed_means(train_raw))
    else:
        imputed = zero_impute(series)
    train_series, test_series = split_train_test(imputed, test_fraction)
    train_windows = make_windows(train_series, ar)
    test_windows = make_windows(test_series, ar)
    stats = stats if stats is not None else fit_normalization(train_windows)
    logger.info(
        "windows prepared",
        extra={"train": train_windows.count, "test": test_windows.count, "imputation": str(imputation)},
    )
    return PreparedData(
        train=apply_normalization(train_windows, stats),
        test=apply_normalization(test_windows, stats),
        stats=stats,
        series=series,
    )


def prepare_run(config: RunConfig, events: Events, imputation: Imputation = Imputation.FORWARD) -> PreparedData:
    return prepare(
        build_mask_delta(events),
        ar=config.train.ar,
        test_fraction=config.test_fraction,
        imputation=imputation,
    )


def fit_model(config: RunConfig, data: PreparedData, train_config: TrainConfig | None = None) -> TrainResult:
    tc = train_config or config.train
    model: ForecastModel = init_model(config.variant, data.stats.n_vars, tc.hidden, tc.seed, data.stats)
    return train(model, data.train, tc)

