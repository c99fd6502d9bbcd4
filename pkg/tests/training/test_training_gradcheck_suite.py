from __future__ import annotations

import time

import numpy as np
import pytest

from sporadic.core.errors import InvalidInputError
from sporadic.models.forecaster import Variant, model_loss, normalized_outputs
from sporadic.training.gradcheck_suite import (
    DEFAULT_TOLERANCE,
    MIN_GRADIENT,
    RESIDUAL_RANGE,
    gradcheck_suite,
    random_problem,
)


def test_suite_passes_for_every_variant() -> None:
    summary = gradcheck_suite(configs=4, seed=2)
    assert summary.passed
    assert [v.variant for v in summary.variants] == list(Variant)
    for check in summary.variants:
        assert check.configs == 4
        assert check.failures == 0
        assert check.max_error < DEFAULT_TOLERANCE


@pytest.mark.integration
def test_default_suite_passes_within_a_minute() -> None:
    started = time.perf_counter()
    summary = gradcheck_suite()
    elapsed = time.perf_counter() - started
    assert summary.passed, summary.model_dump()
    for check in summary.variants:
        assert check.configs == 100
        assert check.max_error < DEFAULT_TOLERANCE
    assert elapsed < 60.0


@pytest.mark.parametrize("variant", list(Variant))
def test_problems_stay_off_the_huber_kink(variant: Variant) -> None:
    rng = np.random.default_rng(31)
    low, high = RESIDUAL_RANGE
    for _ in range(20):
        model, batch = random_problem(variant, rng)
        values_n, gaps_n = normalized_outputs(model, batch["inputs"], batch["last_values"])
        for pred, target in ((values_n, batch["target_values"]), (gaps_n, batch["target_gaps"])):
            residual = np.abs(pred - target)
            assert residual.min() >= low - 1e-12
            assert residual.max() <= high + 1e-12
        _, grads = model_loss(
            model,
            batch["inputs"],
            batch["target_values"],
            batch["target_gaps"],
            batch["target_masks"],
            batch["last_values"],
        )
        for g in grads.values():
            magnitude = np.abs(g)
            assert not np.any((magnitude > 0.0) & (magnitude < MIN_GRADIENT))


def test_sign_flip_is_caught() -> None:
    summary = gradcheck_suite(configs=3, variants=["simple", "velocity"], seed=1, corrupt="delta_head.bias")
    assert not summary.passed
    for check in summary.variants:
        assert not check.passed
        assert check.failures >= 1
        assert check.max_error >= 1.0


def test_suite_arguments() -> None:
    with pytest.raises(InvalidInputError):
        gradcheck_suite(configs=0)
    with pytest.raises(InvalidInputError):
        gradcheck_suite(configs=1, corrupt="value_head.nothing")
