from __future__ import annotations

from pathlib import Path

import pytest

from sporadic.core.errors import DataFileError, InvalidConfigError
from sporadic.models.forecaster import Variant
from sporadic.training.config import RunConfig, TrainConfig, load_run_config


def test_defaults() -> None:
    config = load_run_config()
    assert config.sensor_ids == [1, 2, 3, 4]
    assert config.variable == "temperature"
    assert config.variant is Variant.SIMPLE
    assert config.cutoffs == [30.0]
    assert config.train == TrainConfig()


def test_flat_train_keys_fold_and_run_seed_wins(tmp_path: Path) -> None:
    path = tmp_path / "run.yaml"
    path.write_text(
        "variable: humidity\nseed: 7\nhidden: 16\ntrain:\n  epochs: 3\n  seed: 99\n",
        encoding="utf-8",
    )
    config = load_run_config(path)
    assert config.variable == "humidity"
    assert config.train.hidden == 16
    assert config.train.epochs == 3
    assert config.train.seed == 7

    config = load_run_config(path, {"epochs": 5, "variant": None, "seed": 2})
    assert config.train.epochs == 5
    assert config.variant is Variant.SIMPLE
    assert config.train.seed == 2


@pytest.mark.parametrize(
    "overrides",
    [
        {"variable": "pressure"},
        {"sensor_ids": [0, 1]},
        {"sensor_ids": [1, 1]},
        {"sensor_ids": []},
        {"test_fraction": 1.0},
        {"colour": "blue"},
        {"train": {"lr": 0.1}},
        {"epochs": -1},
        {"variant": "lstm"},
    ],
)
def test_invalid_configs_are_rejected(overrides: dict[str, object]) -> None:
    with pytest.raises(InvalidConfigError):
        load_run_config(None, overrides)


def test_config_file_errors(tmp_path: Path) -> None:
    with pytest.raises(DataFileError):
        load_run_config(tmp_path / "missing.yaml")
    listing = tmp_path / "list.yaml"
    listing.write_text("- 1\n- 2\n", encoding="utf-8")
    with pytest.raises(InvalidConfigError):
        load_run_config(listing)
    empty = tmp_path / "empty.yaml"
    empty.write_text("", encoding="utf-8")
    assert load_run_config(empty).seed == 0


def test_run_id_tracks_the_config() -> None:
    a = RunConfig.model_validate({"seed": 1, "hidden": 8})
    b = RunConfig.model_validate({"seed": 1, "train": {"hidden": 8}})
    c = RunConfig.model_validate({"seed": 2, "hidden": 8})
    assert a.run_id() == b.run_id()
    assert a.run_id() != c.run_id()
    assert len(a.run_id()) == 12
    assert a.echo()["train"]["hidden"] == 8
