"""Run and training configuration.

A run config is a flat YAML mapping; training keys may sit at the top level
or under ``train``. Command-line flags are merged on top before validation.
"""

from __future__ import annotations

import hashlib
from collections.abc import Mapping
from pathlib import Path
from typing import Any

import yaml
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from ..core.config import settings
from ..core.errors import DataFileError, InvalidConfigError
from ..core.reports import canonical_json
from ..ingest.parser import MAX_SENSOR_ID, MIN_SENSOR_ID, VARIABLES
from ..models.forecaster import Variant
from ..numeric.optim import OptimizerKind


class TrainConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    ar: int = Field(default=10, ge=1)
    hidden: int = Field(default=64, ge=1)
    epochs: int = Field(default=30, ge=0)
    batch_size: int = Field(default=128, ge=1)
    learning_rate: float = Field(default=1e-3, gt=0)
    # Multiply the rate by lr_decay_factor this many times, evenly spaced over all steps
    lr_decays: int = Field(default=0, ge=0)
    lr_decay_factor: float = Field(default=0.5, gt=0.0, le=1.0)
    seed: int = Field(default=0, ge=0)
    shuffle: bool = True
    loss_threshold: float = Field(default=1.0, gt=0)
    gap_weight: float = Field(default=1.0, ge=0)
    clip_norm: float = Field(default=5.0, gt=0)
    optimizer: OptimizerKind = OptimizerKind.ADAM
    # False trains on every target entry, the unmasked-loss ablation
    masked_loss: bool = True


# Keys shared by both levels stay with the run
_RUN_LEVEL_KEYS = {"seed"}
TRAIN_KEYS = frozenset(TrainConfig.model_fields) - _RUN_LEVEL_KEYS


class RunConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    data_path: Path | None = None
    events_cache: Path | None = None
    sensor_ids: list[int] = Field(default_factory=lambda: [1, 2, 3, 4], min_length=1)
    variable: str = "temperature"
    test_fraction: float = Field(default=0.3, gt=0.0, lt=1.0)
    cutoffs: list[float] = Field(default_factory=lambda: [30.0], min_length=1)
    variant: Variant = Variant.SIMPLE
    output_dir: Path = Field(default_factory=lambda: Path(settings.output_dir))
    seed: int = Field(default=0, ge=0)
    train: TrainConfig = Field(default_factory=TrainConfig)

    @model_validator(mode="before")
    @classmethod
    def _fold_train_keys(cls, data: Any) -> Any:
        if not isinstance(data, Mapping):
            return data
        flat = dict(data)
        nested = flat.pop("train", None) or {}
        if not isinstance(nested, Mapping):
            raise ValueError("train must be a mapping")
        train = dict(nested)
        for key in TRAIN_KEYS & set(flat):
            train[key] = flat.pop(key)
        flat["train"] = train
        return flat

    @field_validator("variable")
    @classmethod
    def _known_variable(cls, v: str) -> str:
        if v not in VARIABLES:
            raise ValueError(f"unknown variable {v!r}; expected one of {list(VARIABLES)}")
        return v

    @field_validator("sensor_ids")
    @classmethod
    def _known_sensors(cls, v: list[int]) -> list[int]:
        bad = [s for s in v if not MIN_SENSOR_ID <= s <= MAX_SENSOR_ID]
        if bad:
            raise ValueError(f"unknown sensor ids {bad}")
        if len(set(v)) != len(v):
            raise ValueError(f"duplicate sensor ids in {v}")
        return v

    @model_validator(mode="after")
    def _seed_governs_training(self) -> RunConfig:
        if self.train.seed != self.seed:
            self.train = self.train.model_copy(update={"seed": self.seed})
        return self

    def echo(self) -> dict[str, Any]:
        return self.model_dump(mode="json")

    def run_id(self) -> str:
        return hashlib.sha256(canonical_json(self.echo()).encode("utf-8")).hexdigest()[:12]


def read_config_file(path: Path) -> dict[str, Any]:
    try:
        with open(path, encoding="utf-8") as f:
            data = yaml.safe_load(f)
    except OSError as e:
        raise DataFileError(str(path), f"cannot read config: {e}") from e
    except yaml.YAMLError as e:
        raise InvalidConfigError(f"{path}: not valid YAML: {e}") from e
    if data is None:
        return {}
    if not isinstance(data, dict):
        raise InvalidConfigError(f"{path}: config must be a key-value mapping")
    return data


def load_run_config(path: Path | None = None, overrides: Mapping[str, Any] | None = None) -> RunConfig:
    """File values first, then non-None ``overrides``; validated before any work."""
    data = read_config_file(path) if path is not None else {}
    for key, value in (overrides or {}).items():
        if value is not None:
            data[key] = value
    try:
        return RunConfig.model_validate(data)
    except ValidationError as e:
        raise InvalidConfigError(f"invalid run config: {e}") from e
