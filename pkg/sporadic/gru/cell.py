"""Gated recurrent unit with hand-derived gradients.

Update equations for one step, with ``*`` elementwise:

    r_t = sigmoid(W_r x_t + U_r h_{t-1} + b_r)
    z_t = sigmoid(W_z x_t + U_z h_{t-1} + b_z)
    h~_t = tanh(W x_t + U (r_t * h_{t-1}) + b)
    h_t = (1 - z_t) * h_{t-1} + z_t * h~_t

All functions accept a single vector (``(input_dim,)``) or a batch
(``(B, input_dim)``); windows are ``(AR, input_dim)`` or ``(B, AR, input_dim)``.
Outputs keep the rank of the input.
"""

from __future__ import annotations

from collections.abc import Iterator
from dataclasses import dataclass, fields

import numpy as np

from ..core.errors import InvalidInputError
from ..numeric.ops import RealMatrix, sigmoid

PARAM_NAMES: tuple[str, ...] = ("W_r", "W_z", "W", "U_r", "U_z", "U", "b_r", "b_z", "b")


@dataclass(eq=False)
class GruParams:
    W_r: RealMatrix
    W_z: RealMatrix
    W: RealMatrix
    U_r: RealMatrix
    U_z: RealMatrix
    U: RealMatrix
    b_r: RealMatrix
    b_z: RealMatrix
    b: RealMatrix

    def __post_init__(self) -> None:
        hidden, inp = self.W.shape
        for name in ("W_r", "W_z", "W"):
            if getattr(self, name).shape != (hidden, inp):
                raise InvalidInputError(f"{name} must be ({hidden}, {inp})")
        for name in ("U_r", "U_z", "U"):
            if getattr(self, name).shape != (hidden, hidden):
                raise InvalidInputError(f"{name} must be ({hidden}, {hidden})")
        for name in ("b_r", "b_z", "b"):
            if getattr(self, name).shape != (hidden,):
                raise InvalidInputError(f"{name} must be ({hidden},)")

    @property
    def input_dim(self) -> int:
        return int(self.W.shape[1])

    @property
    def hidden_dim(self) -> int:
        return int(self.W.shape[0])

    def arrays(self) -> dict[str, RealMatrix]:
        """Named views onto the parameter arrays, in declaration order."""
        return {f.name: getattr(self, f.name) for f in fields(self)}

    def __iter__(self) -> Iterator[RealMatrix]:
        return iter(self.arrays().values())

    @classmethod
    def zeros(cls, input_dim: int, hidden_dim: int) -> GruParams:
        h, i = hidden_dim, input_dim
        return cls(
            W_r=np.zeros((h, i)),
            W_z=np.zeros((h, i)),
            W=np.zeros((h, i)),
            U_r=np.zeros((h, h)),
            U_z=np.zeros((h, h)),
            U=np.zeros((h, h)),
            b_r=np.zeros(h),
            b_z=np.zeros(h),
            b=np.zeros(h),
        )

    def zeros_like(self) -> GruParams:
        return GruParams.zeros(self.input_dim, self.hidden_dim)

    def copy(self) -> GruParams:
        return GruParams(**{k: v.copy() for k, v in self.arrays().items()})

    def add_(self, other: GruParams) -> None:
        for mine, theirs in zip(self, other, strict=True):
            mine += theirs


@dataclass
class GruStepCache:
    x_t: RealMatrix
    h_prev: RealMatrix
    r_t: RealMatrix
    z_t: RealMatrix
    h_tilde: RealMatrix
    h_t: RealMatrix
    batched: bool


def uniform_fan(rng: np.random.Generator, rows: int, cols: int) -> RealMatrix:
    bound = np.sqrt(6.0 / (rows + cols))
    return rng.uniform(-bound, bound, size=(rows, cols))


def init_params(
    input_dim: int, hidden_dim: int, seed: int | np.random.Generator = 0
) -> GruParams:
    """Fan-based uniform weights, zero biases; deterministic for a fixed seed."""
    if input_dim < 1 or hidden_dim < 1:
        raise InvalidInputError("GRU dimensions must be >= 1")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    h, i = hidden_dim, input_dim
    return GruParams(
        W_r=uniform_fan(rng, h, i),
        W_z=uniform_fan(rng, h, i),
        W=uniform_fan(rng, h, i),
        U_r=uniform_fan(rng, h, h),
        U_z=uniform_fan(rng, h, h),
        U=uniform_fan(rng, h, h),
        b_r=np.zeros(h),
        b_z=np.zeros(h),
        b=np.zeros(h),
    )


def gru_forward(
    x_t: RealMatrix, h_prev: RealMatrix, params: GruParams
) -> tuple[RealMatrix, GruStepCache]:
    batched = np.ndim(x_t) == 2
    x = np.atleast_2d(np.asarray(x_t, dtype=np.float64))
    h0 = np.atleast_2d(np.asarray(h_prev, dtype=np.float64))
    if x.shape[-1] != params.input_dim or h0.shape[-1] != params.hidden_dim:
        raise InvalidInputError(
            f"expected input {params.input_dim} / hidden {params.hidden_dim}, "
            f"got {x.shape[-1]} / {h0.shape[-1]}"
        )
    if h0.shape[0] != x.shape[0]:
        h0 = np.broadcast_to(h0, (x.shape[0], params.hidden_dim))

    r = sigmoid(x @ params.W_r.T + h0 @ params.U_r.T + params.b_r)
    z = sigmoid(x @ params.W_z.T + h0 @ params.U_z.T + params.b_z)
    h_tilde = np.tanh(x @ params.W.T + (r * h0) @ params.U.T + params.b)
    h = (1.0 - z) * h0 + z * h_tilde

    cache = GruStepCache(x_t=x, h_prev=h0, r_t=r, z_t=z, h_tilde=h_tilde, h_t=h, batched=batched)
    return (h if batched else h[0]), cache


def gru_backward(
    cache: GruStepCache, params: GruParams, dh_t: RealMatrix
) -> tuple[RealMatrix, RealMatrix, GruParams]:
    """Chain rule through one step.

    Returns:
        (dL/dx_t, dL/dh_prev, dL/dparams)
    """
    dh = np.atleast_2d(np.asarray(dh_t, dtype=np.float64))
    x, h0, r, z, ht = cache.x_t, cache.h_prev, cache.r_t, cache.z_t, cache.h_tilde

    dz = dh * (ht - h0)
    dh_prev = dh * (1.0 - z)
    da_h = dh * z * (1.0 - ht * ht)
    d_rh = da_h @ params.U
    dr = d_rh * h0
    dh_prev = dh_prev + d_rh * r
    da_z = dz * z * (1.0 - z)
    da_r = dr * r * (1.0 - r)

    dh_prev = dh_prev + da_z @ params.U_z + da_r @ params.U_r
    dx = da_h @ params.W + da_z @ params.W_z + da_r @ params.W_r

    grads = GruParams(
        W_r=da_r.T @ x,
        W_z=da_z.T @ x,
        W=da_h.T @ x,
        U_r=da_r.T @ h0,
        U_z=da_z.T @ h0,
        U=da_h.T @ (r * h0),
        b_r=da_r.sum(axis=0),
        b_z=da_z.sum(axis=0),
        b=da_h.sum(axis=0),
    )
    if not cache.batched:
        return dx[0], dh_prev[0], grads
    return dx, dh_prev, grads


def gru_sequence_forward(
    window: RealMatrix, h_0: RealMatrix | None, params: GruParams
) -> tuple[RealMatrix, list[GruStepCache]]:
    """Fold ``gru_forward`` over the rows of ``window`` in time order; ``h_0=None`` starts from zeros."""
    w = np.asarray(window, dtype=np.float64)
    if w.ndim not in (2, 3):
        raise InvalidInputError(f"window must be (AR, in) or (B, AR, in), got {w.shape}")
    steps = w.shape[-2]
    if h_0 is None:
        h = np.zeros((w.shape[0], params.hidden_dim)) if w.ndim == 3 else np.zeros(params.hidden_dim)
    else:
        h = np.asarray(h_0, dtype=np.float64)
    caches: list[GruStepCache] = []
    for t in range(steps):
        h, cache = gru_forward(w[..., t, :], h, params)
        caches.append(cache)
    return h, caches


def gru_sequence_backward(
    caches: list[GruStepCache], params: GruParams, dh_last: RealMatrix
) -> tuple[RealMatrix, RealMatrix, GruParams]:
    """Backpropagation through time from a gradient on the final hidden state.

    Returns:
        (dL/dwindow shaped like the forward window, dL/dh_0, summed dL/dparams)
    """
    grads = params.zeros_like()
    dh = np.asarray(dh_last, dtype=np.float64)
    dxs: list[RealMatrix] = []
    for cache in reversed(caches):
        dx, dh, step_grads = gru_backward(cache, params, dh)
        grads.add_(step_grads)
        dxs.append(dx)
    dxs.reverse()
    return np.stack(dxs, axis=-2), dh, grads
