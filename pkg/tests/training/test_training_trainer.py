from __future__ import annotations

import numpy as np
import pytest

from sporadic.core.errors import InvalidInputError, TrainingDivergedError
from sporadic.data.windows import WindowSet, denormalize
from sporadic.models.forecaster import Variant, init_model
from sporadic.training.config import TrainConfig
from sporadic.training.trainer import train


def _config(**kw: object) -> TrainConfig:
    base: dict[str, object] = {"epochs": 3, "hidden": 4, "batch_size": 16, "learning_rate": 1e-2}
    base.update(kw)
    return TrainConfig.model_validate(base)


def test_zero_epochs_leave_the_model_unchanged(windows: WindowSet) -> None:
    model = init_model(Variant.SIMPLE, windows.n_vars, 4, seed=1, stats=windows.stats)
    result = train(model, windows, _config(epochs=0))
    assert result.history == []
    assert result.steps == 0
    assert result.model is not model
    for name, arr in model.parameters().items():
        np.testing.assert_array_equal(result.model.parameters()[name], arr)


@pytest.mark.parametrize("variant", list(Variant))
def test_same_seed_same_history(windows: WindowSet, variant: Variant) -> None:
    model = init_model(variant, windows.n_vars, 4, seed=1, stats=windows.stats)
    before = {k: v.copy() for k, v in model.parameters().items()}
    first = train(model, windows, _config(seed=5))
    second = train(model, windows, _config(seed=5))
    assert first.history == second.history
    assert len(first.history) == 3
    assert first.steps == 3 * -(-windows.count // 16)
    for name, arr in before.items():
        np.testing.assert_array_equal(model.parameters()[name], arr)
    assert any(
        not np.array_equal(arr, first.model.parameters()[name]) for name, arr in before.items()
    )


def test_shuffle_order_follows_the_seed(windows: WindowSet) -> None:
    model = init_model(Variant.SIMPLE, windows.n_vars, 4, seed=1, stats=windows.stats)
    a = train(model, windows, _config(seed=1))
    b = train(model, windows, _config(seed=2))
    assert a.history != b.history


def test_training_reduces_the_loss(windows: WindowSet) -> None:
    model = init_model(Variant.SIMPLE, windows.n_vars, 8, seed=0, stats=windows.stats)
    seen: list[tuple[int, float]] = []
    result = train(model, windows, _config(epochs=20), on_epoch=lambda e, loss: seen.append((e, loss)))
    assert [e for e, _ in seen] == list(range(1, 21))
    assert [loss for _, loss in seen] == result.history
    assert result.history[-1] < result.history[0]


def test_unmasked_loss_changes_training(windows: WindowSet) -> None:
    model = init_model(Variant.SIMPLE, windows.n_vars, 4, seed=1, stats=windows.stats)
    masked = train(model, windows, _config())
    unmasked = train(model, windows, _config(masked_loss=False))
    assert masked.history != unmasked.history


def test_non_finite_loss_raises(windows: WindowSet) -> None:
    model = init_model(Variant.SIMPLE, windows.n_vars, 4, seed=1, stats=windows.stats)
    model.delta_head.bias[:] = np.nan
    with pytest.raises(TrainingDivergedError) as info:
        train(model, windows, _config())
    assert info.value.step == 1


def test_rejects_raw_or_mismatched_windows(windows: WindowSet) -> None:
    model = init_model(Variant.SIMPLE, windows.n_vars, 4, stats=windows.stats)
    with pytest.raises(InvalidInputError):
        train(model, denormalize(windows), _config())
    other = init_model(Variant.SIMPLE, windows.n_vars + 1, 4)
    with pytest.raises(InvalidInputError):
        train(other, windows, _config())


def test_learning_rate_decays_at_even_step_intervals(windows: WindowSet) -> None:
    model = init_model(Variant.SIMPLE, windows.n_vars, 4, seed=1, stats=windows.stats)
    constant = train(model, windows, _config(epochs=2))
    unit_factor = train(model, windows, _config(epochs=2, lr_decays=2, lr_decay_factor=1.0))
    halved = train(model, windows, _config(epochs=2, lr_decays=2))
    assert unit_factor.history == constant.history
    # One decay per epoch here, so the first epoch runs at the full rate
    assert halved.history[0] == constant.history[0]
    assert halved.history[1] != constant.history[1]


@pytest.mark.parametrize("bad", [{"lr_decays": -1}, {"lr_decay_factor": 0.0}, {"lr_decay_factor": 1.5}])
def test_invalid_decay_settings_are_rejected(bad: dict[str, object]) -> None:
    with pytest.raises(ValueError):
        _config(**bad)
