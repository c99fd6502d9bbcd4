"""Dense float64 primitives: activations, Huber loss and its masked reduction."""

from __future__ import annotations

import math
from typing import TypeAlias

import numpy as np
import numpy.typing as npt

from ..core.errors import InvalidInputError

RealMatrix: TypeAlias = npt.NDArray[np.float64]

DEFAULT_HUBER_THRESHOLD = 1.0


def as_real(values: npt.ArrayLike, *, name: str = "array") -> RealMatrix:
    """Coerce to a float64 array, rejecting NaN and infinity."""
    arr = np.asarray(values, dtype=np.float64)
    if not np.all(np.isfinite(arr)):
        raise InvalidInputError(f"{name} contains non-finite entries")
    return arr


def sigmoid(x: RealMatrix) -> RealMatrix:
    # Split by sign so exp never overflows
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def tanh(x: RealMatrix) -> RealMatrix:
    return np.tanh(x)


def huber(residual: float, threshold: float = DEFAULT_HUBER_THRESHOLD) -> float:
    if not math.isfinite(residual):
        raise InvalidInputError(f"non-finite residual: {residual}")
    if threshold <= 0:
        raise InvalidInputError(f"huber threshold must be positive, got {threshold}")
    a = abs(residual)
    if a <= threshold:
        return 0.5 * residual * residual
    return threshold * (a - 0.5 * threshold)


def huber_elementwise(residual: RealMatrix, threshold: float) -> RealMatrix:
    a = np.abs(residual)
    return np.where(a <= threshold, 0.5 * residual * residual, threshold * (a - 0.5 * threshold))


def huber_derivative(residual: RealMatrix, threshold: float) -> RealMatrix:
    return np.clip(residual, -threshold, threshold)


def masked_huber_loss(
    pred: RealMatrix,
    target: RealMatrix,
    mask: npt.ArrayLike,
    threshold: float = DEFAULT_HUBER_THRESHOLD,
) -> tuple[float, RealMatrix]:
    """Mean Huber loss over entries with ``mask == 1``.

    Entries where the mask is 0 contribute nothing to the loss or the gradient,
    whatever ``pred`` and ``target`` hold there.

    Returns:
        (loss, d loss / d pred)
    """
    pred = np.asarray(pred, dtype=np.float64)
    target = np.asarray(target, dtype=np.float64)
    m = np.asarray(mask)
    if pred.shape != target.shape or pred.shape != m.shape:
        raise InvalidInputError(
            f"shape mismatch: pred {pred.shape}, target {target.shape}, mask {m.shape}"
        )
    if threshold <= 0:
        raise InvalidInputError(f"huber threshold must be positive, got {threshold}")
    present = m > 0
    count = max(1, int(np.count_nonzero(present)))
    residual = np.where(present, pred - target, 0.0)
    loss = float(np.sum(huber_elementwise(residual, threshold))) / count
    grad = np.where(present, huber_derivative(residual, threshold), 0.0) / count
    return loss, grad
