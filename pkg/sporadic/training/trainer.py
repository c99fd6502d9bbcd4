from __future__ import annotations

import logging
import math
from collections.abc import Callable
from dataclasses import dataclass, field

import numpy as np

from ..core.errors import InsufficientDataError, InvalidInputError, TrainingDivergedError
from ..data.windows import WindowSet
from ..models.forecaster import ForecastModel, model_loss
from ..numeric.optim import OptimizerState, clip_grad_norm, optimizer_step
from .config import TrainConfig

logger = logging.getLogger(__name__)

EpochCallback = Callable[[int, float], None]


@dataclass(eq=False)
class TrainResult:
    model: ForecastModel
    history: list[float] = field(default_factory=list)
    steps: int = 0


def train(
    model: ForecastModel,
    windows: WindowSet,
    config: TrainConfig,
    *,
    on_epoch: EpochCallback | None = None,
) -> TrainResult:
    """Mini-batch training on ``model_loss``; ``model`` itself is left untouched.

    The shuffle order depends only on ``config.seed``, so a fixed seed gives
    an identical loss history. ``history[e]`` is the window-weighted mean
    batch loss of epoch ``e``.
    """
    if windows.count == 0:
        raise InsufficientDataError("training set has no windows")
    if not windows.normalized:
        raise InvalidInputError("train on normalized windows")
    if windows.n_vars != model.n_vars:
        raise InvalidInputError(f"windows carry {windows.n_vars} variables, model {model.n_vars}")

    trained = model.copy()
    params = trained.parameters()
    state = OptimizerState.for_params(params, config.optimizer, learning_rate=config.learning_rate)
    rng = np.random.default_rng([config.seed, 1])
    loss_masks = windows.target_masks if config.masked_loss else np.ones_like(windows.target_masks)
    result = TrainResult(model=trained)
    decay_every = _decay_interval(config, windows.count)

    for epoch in range(1, config.epochs + 1):
        order = rng.permutation(windows.count) if config.shuffle else np.arange(windows.count)
        total = 0.0
        for start in range(0, windows.count, config.batch_size):
            idx = order[start : start + config.batch_size]
            loss, grads = model_loss(
                trained,
                windows.inputs[idx],
                windows.target_values[idx],
                windows.target_gaps[idx],
                loss_masks[idx],
                windows.last_values[idx],
                threshold=config.loss_threshold,
                gap_weight=config.gap_weight,
            )
            result.steps += 1
            if not math.isfinite(loss):
                logger.error("training diverged", extra={"step": result.steps, "epoch": epoch})
                raise TrainingDivergedError(result.steps, "non-finite loss")
            clip_grad_norm(grads, config.clip_norm)
            optimizer_step(params, grads, state)
            if decay_every and result.steps % decay_every == 0:
                state.learning_rate *= config.lr_decay_factor
                logger.debug(
                    "learning rate decayed", extra={"step": result.steps, "learning_rate": state.learning_rate}
                )
            total += loss * len(idx)
        epoch_loss = total / windows.count
        result.history.append(epoch_loss)
        logger.info("epoch finished", extra={"epoch": epoch, "loss": epoch_loss})
        if on_epoch is not None:
            on_epoch(epoch, epoch_loss)
    return result


def _decay_interval(config: TrainConfig, count: int) -> int:
    """Steps between learning-rate decays; 0 when the rate stays constant."""
    if config.lr_decays == 0:
        return 0
    total_steps = config.epochs * math.ceil(count / config.batch_size)
    return max(total_steps // config.lr_decays, 1)
