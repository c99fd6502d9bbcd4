"""Model checkpoints on top of the GRU checkpoint codec.

The header carries the variant, dimensions, window length, seed and the
normalization stats; arrays are stored under ``model.parameters()`` names.
"""

from __future__ import annotations

import logging
from collections.abc import Mapping
from pathlib import Path
from typing import Any

from ..core.errors import DataFileError, InvalidInputError
from ..data.windows import NormalizationStats
from ..gru.checkpoint import gru_from_arrays, read_checkpoint, write_checkpoint
from ..numeric.ops import RealMatrix
from .forecaster import DenseHead, ForecastModel, Variant

logger = logging.getLogger(__name__)

FORMAT_VERSION = 1


def model_meta(model: ForecastModel, **extra: Any) -> dict[str, Any]:
    return {
        "format": FORMAT_VERSION,
        "variant": str(model.variant),
        "n_vars": model.n_vars,
        "hidden_dim": model.hidden_dim,
        "seed": model.seed,
        "stats": model.stats.to_dict(),
        **extra,
    }


def save_model(path: Path, model: ForecastModel, **extra: Any) -> None:
    """Write ``model``; ``extra`` (ar, loss threshold, gap weight, ...) goes into the header."""
    write_checkpoint(path, model_meta(model, **extra), model.parameters())
    logger.info("checkpoint written", extra={"path": str(path), "variant": str(model.variant)})


def _head(arrays: Mapping[str, RealMatrix], prefix: str) -> DenseHead | None:
    if f"{prefix}.weight" not in arrays:
        return None
    return DenseHead(arrays[f"{prefix}.weight"], arrays[f"{prefix}.bias"])


def model_from_arrays(meta: Mapping[str, Any], arrays: Mapping[str, RealMatrix]) -> ForecastModel:
    delta = _head(arrays, "delta_head")
    if delta is None:
        raise DataFileError("<checkpoint>", "missing delta head")
    second = gru_from_arrays(arrays, "second_trunk.") if "second_trunk.W" in arrays else None
    try:
        return ForecastModel(
            variant=Variant(meta["variant"]),
            trunk=gru_from_arrays(arrays, "trunk."),
            delta_head=delta,
            stats=NormalizationStats.from_arrays(meta["stats"]),
            value_head=_head(arrays, "value_head"),
            rate_head=_head(arrays, "rate_head"),
            second_trunk=second,
            seed=int(meta.get("seed", 0)),
        )
    except (KeyError, TypeError, ValueError, InvalidInputError) as e:
        raise DataFileError("<checkpoint>", f"inconsistent model checkpoint: {e}") from e


def load_model(path: Path) -> tuple[ForecastModel, dict[str, Any]]:
    """Returns the model and the full header (including caller metadata)."""
    meta, arrays = read_checkpoint(path)
    if meta.get("format") != FORMAT_VERSION or "variant" not in meta:
        raise DataFileError(str(path), "not a model checkpoint")
    try:
        model = model_from_arrays(meta, arrays)
    except DataFileError as e:
        raise DataFileError(str(path), str(e).split(": ", 1)[-1]) from e
    return model, meta
