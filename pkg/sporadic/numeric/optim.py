from __future__ import annotations

import math
from collections.abc import Mapping, MutableMapping
from dataclasses import dataclass, field
from enum import StrEnum

import numpy as np

from ..core.errors import InvalidInputError, TrainingDivergedError
from .ops import RealMatrix


class OptimizerKind(StrEnum):
    SGD = "sgd"
    ADAM = "adam"


@dataclass
class OptimizerState:
    """Optimizer hyperparameters plus per-parameter moment buffers."""

    kind: OptimizerKind = OptimizerKind.ADAM
    learning_rate: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8
    step: int = 0
    first_moment: dict[str, RealMatrix] = field(default_factory=dict)
    second_moment: dict[str, RealMatrix] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.learning_rate <= 0:
            raise InvalidInputError(f"learning rate must be positive, got {self.learning_rate}")
        if not (0.0 < self.beta1 < 1.0 and 0.0 < self.beta2 < 1.0):
            raise InvalidInputError("decay rates must lie in (0, 1)")
        if self.epsilon <= 0:
            raise InvalidInputError("epsilon must be positive")

    @classmethod
    def for_params(
        cls, params: Mapping[str, RealMatrix], kind: OptimizerKind | str = OptimizerKind.ADAM, **kw: float
    ) -> OptimizerState:
        state = cls(kind=OptimizerKind(kind), **kw)  # type: ignore[arg-type]
        for name, p in params.items():
            state.first_moment[name] = np.zeros_like(p)
            state.second_moment[name] = np.zeros_like(p)
        return state


def optimizer_step(
    params: MutableMapping[str, RealMatrix],
    grads: Mapping[str, RealMatrix],
    state: OptimizerState,
) -> None:
    """Apply one update in place and advance ``state.step``.

    A non-finite gradient aborts before any parameter is touched.
    """
    for name, p in params.items():
        g = grads.get(name)
        if g is None or g.shape != p.shape:
            raise InvalidInputError(f"gradient for {name!r} missing or mis-shaped")
        if not np.all(np.isfinite(g)):
            raise TrainingDivergedError(state.step + 1, f"non-finite gradient in {name}")

    state.step += 1
    t = state.step
    if state.kind is OptimizerKind.SGD:
        for name, p in params.items():
            p -= state.learning_rate * grads[name]
        return

    b1, b2 = state.beta1, state.beta2
    bias1 = 1.0 - b1**t
    bias2 = 1.0 - b2**t
    for name, p in params.items():
        g = grads[name]
        m = state.first_moment.setdefault(name, np.zeros_like(p))
        v = state.second_moment.setdefault(name, np.zeros_like(p))
        m *= b1
        m += (1.0 - b1) * g
        v *= b2
        v += (1.0 - b2) * g * g
        p -= state.learning_rate * (m / bias1) / (np.sqrt(v / bias2) + state.epsilon)


def clip_grad_norm(grads: MutableMapping[str, RealMatrix], max_norm: float) -> float:
    """Scale gradients in place so their global L2 norm is at most ``max_norm``.

    Returns the norm before clipping.
    """
    total = math.sqrt(sum(float(np.sum(g * g)) for g in grads.values()))
    if max_norm > 0 and total > max_norm:
        scale = max_norm / (total + 1e-12)
        for g in grads.values():
            g *= scale
    return total
