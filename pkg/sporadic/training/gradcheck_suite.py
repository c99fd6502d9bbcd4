"""Finite-difference checks of every model variant on random tiny problems."""

from __future__ import annotations

import logging
from collections.abc import Mapping, Sequence

import numpy as np
from pydantic import BaseModel, Field

from ..core.errors import InvalidInputError
from ..data.windows import NormalizationStats
from ..models.forecaster import (
    ForecastModel,
    Variant,
    init_model,
    model_loss,
    model_objective,
    normalized_outputs,
)
from ..numeric.gradcheck import finite_diff_gradcheck
from ..numeric.ops import RealMatrix

logger = logging.getLogger(__name__)

DEFAULT_TOLERANCE = 1e-4
MAX_VARS = 2
MAX_HIDDEN = 8
MAX_AR = 5
# Residuals stay inside the quadratic branch of the default Huber threshold
RESIDUAL_RANGE = (0.1, 0.8)
# Nonzero analytic entries below this drown in central-difference round-off
MIN_GRADIENT = 1e-6
MAX_DRAWS = 200


class VariantCheck(BaseModel):
    variant: Variant
    configs: int
    max_error: float
    failures: int
    passed: bool


class GradcheckSummary(BaseModel):
    tolerance: float
    epsilon: float
    seed: int
    variants: list[VariantCheck] = Field(default_factory=list)
    passed: bool = True


def random_problem(
    variant: Variant, rng: np.random.Generator
) -> tuple[ForecastModel, dict[str, RealMatrix]]:
    """A jittered model with random stats plus a random batch of windows and targets.

    Targets sit a random 0.1 to 0.8 away from the current forecast on either
    side, so no observed residual lies on the Huber kink. Draws whose analytic
    gradient has a nonzero entry under ``MIN_GRADIENT`` are discarded, since
    float64 central differences cannot resolve them to the tolerance.
    """
    for _ in range(MAX_DRAWS):
        model, batch = _draw_problem(variant, rng)
        _, grads = model_loss(model, *_batch_args(batch))
        if all(_resolvable(g) for g in grads.values()):
            return model, batch
    raise InvalidInputError(f"no well-conditioned {variant} problem in {MAX_DRAWS} draws")


def _resolvable(grad: RealMatrix) -> bool:
    magnitude = np.abs(grad)
    return not bool(np.any((magnitude > 0.0) & (magnitude < MIN_GRADIENT)))


def _offsets(rng: np.random.Generator, shape: tuple[int, ...]) -> RealMatrix:
    low, high = RESIDUAL_RANGE
    return rng.uniform(low, high, shape) * rng.choice([-1.0, 1.0], shape)


def _draw_problem(
    variant: Variant, rng: np.random.Generator
) -> tuple[ForecastModel, dict[str, RealMatrix]]:
    d = int(rng.integers(1, MAX_VARS + 1))
    h = int(rng.integers(1, MAX_HIDDEN + 1))
    ar = int(rng.integers(1, MAX_AR + 1))
    b = int(rng.integers(1, 4))
    stats = NormalizationStats(
        value_mean=rng.normal(0.0, 1.0, d),
        value_scale=rng.uniform(0.5, 2.0, d),
        gap_mean=rng.uniform(0.5, 2.0, d),
        gap_scale=rng.uniform(0.5, 2.0, d),
    )
    model = init_model(variant, d, h, int(rng.integers(0, 2**31)), stats)
    for p in model.parameters().values():
        p += rng.normal(0.0, 0.3, p.shape)

    inputs = rng.normal(0.0, 1.0, (b, ar, 3 * d))
    inputs[:, :, d : 2 * d] = rng.integers(0, 2, (b, ar, d))
    masks = rng.integers(0, 2, (b, d)).astype(np.float64)
    masks[0, 0] = 1.0
    last_values = rng.normal(0.0, 1.0, (b, d))
    values_n, gaps_n = normalized_outputs(model, inputs, last_values)
    batch = {
        "inputs": inputs,
        "target_values": values_n + _offsets(rng, (b, d)),
        "target_gaps": gaps_n + _offsets(rng, (b, d)),
        "target_masks": masks,
        "last_values": last_values,
    }
    return model, batch


def _batch_args(batch: Mapping[str, RealMatrix]) -> tuple[RealMatrix, ...]:
    keys = ("inputs", "target_values", "target_gaps", "target_masks", "last_values")
    return tuple(batch[k] for k in keys)


def check_model(
    model: ForecastModel,
    batch: Mapping[str, RealMatrix],
    *,
    epsilon: float = 1e-5,
    threshold: float = 1.0,
    gap_weight: float = 1.0,
    corrupt: str | None = None,
) -> float:
    """Max relative error between analytic and numeric gradients of ``model_loss``.

    ``corrupt`` names one parameter whose analytic gradient is sign-flipped.
    """
    params = model.parameters()
    if corrupt is not None and corrupt not in params:
        raise InvalidInputError(f"unknown parameter {corrupt!r}")

    args = _batch_args(batch)

    def loss_fn() -> tuple[float, dict[str, RealMatrix]]:
        loss, grads = model_loss(model, *args, threshold=threshold, gap_weight=gap_weight)
        if corrupt is not None:
            grads[corrupt] = -grads[corrupt]
        return loss, grads

    def objective() -> float:
        return model_objective(model, *args, threshold=threshold, gap_weight=gap_weight)

    return finite_diff_gradcheck(loss_fn, params, epsilon, objective=objective)


def gradcheck_suite(
    configs: int = 100,
    *,
    variants: Sequence[Variant | str] = tuple(Variant),
    seed: int = 0,
    epsilon: float = 1e-5,
    tolerance: float = DEFAULT_TOLERANCE,
    corrupt: str | None = None,
) -> GradcheckSummary:
    """Run ``configs`` random problems per variant.

    With ``corrupt`` set, the named parameter's analytic gradient is negated
    in every check, which must show up as a failure.
    """
    if configs < 1:
        raise InvalidInputError("need at least one configuration")
    summary = GradcheckSummary(tolerance=tolerance, epsilon=epsilon, seed=seed)
    for index, variant in enumerate(Variant(v) for v in variants):
        rng = np.random.default_rng([seed, index])
        worst, failures = 0.0, 0
        for _ in range(configs):
            model, batch = random_problem(variant, rng)
            err = check_model(model, batch, epsilon=epsilon, corrupt=corrupt)
            worst = max(worst, err)
            if err >= tolerance:
                failures += 1
        check = VariantCheck(
            variant=variant, configs=configs, max_error=worst, failures=failures, passed=failures == 0
        )
        if not check.passed:
            logger.warning(
                "gradient check failed",
                extra={"variant": str(variant), "max_error": worst, "failures": failures},
            )
        summary.variants.append(check)
    summary.passed = all(v.passed for v in summary.variants)
    return summary
