from __future__ import annotations

from collections.abc import Callable, Mapping

import numpy as np

from ..core.errors import InvalidInputError
from .ops import RealMatrix

LossAndGrads = Callable[[], tuple[float, Mapping[str, RealMatrix]]]
Objective = Callable[[], float]


def relative_error(analytic: RealMatrix, numeric: RealMatrix) -> float:
    denom = np.maximum(np.maximum(np.abs(analytic), np.abs(numeric)), 1e-8)
    if analytic.size == 0:
        return 0.0
    return float(np.max(np.abs(analytic - numeric) / denom))


def numeric_gradient(objective: Objective, param: RealMatrix, epsilon: float) -> RealMatrix:
    """Central differences for every entry of ``param``, perturbed in place."""
    grad = np.zeros_like(param)
    flat = param.reshape(-1)
    out = grad.reshape(-1)
    for i in range(flat.size):
        original = flat[i]
        flat[i] = original + epsilon
        plus = objective()
        flat[i] = original - epsilon
        minus = objective()
        flat[i] = original
        out[i] = (plus - minus) / (2.0 * epsilon)
    return grad


def finite_diff_gradcheck(
    loss_fn: LossAndGrads,
    params: Mapping[str, RealMatrix],
    epsilon: float = 1e-5,
    *,
    objective: Objective | None = None,
) -> float:
    """Compare analytic gradients against central differences.

    ``loss_fn`` closes over ``params`` (the arrays are perturbed in place and
    restored) and returns ``(loss, grads)`` with ``grads`` keyed like
    ``params``. ``objective``, when given, must return the same loss without
    gradients and is used for the perturbed evaluations.

    Returns:
        The maximum over all entries of
        |analytic - numeric| / max(|analytic|, |numeric|, 1e-8).
    """
    if not 1e-7 <= epsilon <= 1e-3:
        raise InvalidInputError(f"epsilon must lie in [1e-7, 1e-3], got {epsilon}")
    _, grads = loss_fn()
    analytic = {name: np.array(g, dtype=np.float64, copy=True) for name, g in grads.items()}
    evaluate = objective if objective is not None else (lambda: loss_fn()[0])
    worst = 0.0
    for name, param in params.items():
        numeric = numeric_gradient(evaluate, param, epsilon)
        worst = max(worst, relative_error(analytic[name], numeric))
    return worst
