from __future__ import annotations

import math

import numpy as np
import pytest

from sporadic.core.errors import InvalidInputError, TrainingDivergedError
from sporadic.numeric.optim import OptimizerKind, OptimizerState, clip_grad_norm, optimizer_step


def test_plain_step_hand_arithmetic() -> None:
    params = {"p": np.array([1.0])}
    state = OptimizerState.for_params(params, OptimizerKind.SGD, learning_rate=0.1)
    optimizer_step(params, {"p": np.array([1.0])}, state)
    assert params["p"][0] == pytest.approx(0.9)
    assert state.step == 1


def test_adam_first_step_is_lr_times_sign() -> None:
    params = {"p": np.array([0.0])}
    state = OptimizerState.for_params(params, "adam", learning_rate=0.1)
    assert not state.first_moment["p"].any() and not state.second_moment["p"].any()
    optimizer_step(params, {"p": np.array([2.0])}, state)
    assert params["p"][0] == pytest.approx(-0.1, abs=1e-6)


@pytest.mark.parametrize("kind", list(OptimizerKind))
def test_zero_gradients_leave_params_unchanged(kind: OptimizerKind, rng: np.random.Generator) -> None:
    params = {"w": rng.normal(size=(3, 2)), "b": rng.normal(size=3)}
    before = {k: v.copy() for k, v in params.items()}
    state = OptimizerState.for_params(params, kind)
    for step in range(1, 6):
        optimizer_step(params, {k: np.zeros_like(v) for k, v in params.items()}, state)
        assert state.step == step
    for k in params:
        np.testing.assert_array_equal(params[k], before[k])


def test_non_finite_gradient_aborts_with_step_and_no_update() -> None:
    params = {"a": np.array([1.0]), "b": np.array([2.0])}
    state = OptimizerState.for_params(params, "sgd", learning_rate=0.5)
    optimizer_step(params, {"a": np.array([0.0]), "b": np.array([0.0])}, state)
    with pytest.raises(TrainingDivergedError) as exc:
        optimizer_step(params, {"a": np.array([1.0]), "b": np.array([math.nan])}, state)
    assert exc.value.step == 2
    assert params["a"][0] == 1.0
    assert state.step == 1


def test_state_validation() -> None:
    with pytest.raises(InvalidInputError):
        OptimizerState(learning_rate=0.0)
    with pytest.raises(InvalidInputError):
        OptimizerState(beta1=1.0)


def test_clip_grad_norm_scales_to_max() -> None:
    grads = {"a": np.array([3.0]), "b": np.array([4.0])}
    norm = clip_grad_norm(grads, 1.0)
    assert norm == pytest.approx(5.0)
    total = math.sqrt(sum(float(np.sum(g * g)) for g in grads.values()))
    assert total == pytest.approx(1.0)

    small = {"a": np.array([0.3])}
    clip_grad_norm(small, 5.0)
    assert small["a"][0] == 0.3
