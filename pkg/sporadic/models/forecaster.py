"""Forecasters built on the GRU trunk.

Three wirings share one interface:

- ``simple``: trunk over ``[x; m; gaps]`` windows, a value head and a gap head
  read the final hidden state.
- ``bilayer``: the first trunk predicts gaps; a second trunk reads the window
  with the predicted gaps appended to every row and predicts values, so
  values depend on the predicted report times.
- ``velocity``: a rate head predicts d(value)/dt in raw units per second and
  the value forecast is ``last + rate * predicted gap`` in raw units.

Heads are affine maps. Training works in normalized units; ``Forecast``
carries raw units.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import StrEnum

import numpy as np

from ..core.errors import InvalidInputError
from ..data.windows import (
    NormalizationStats,
    WindowSet,
    denormalize_gaps,
    denormalize_values,
    normalize_values,
)
from ..gru.cell import (
    GruParams,
    GruStepCache,
    gru_sequence_backward,
    gru_sequence_forward,
    init_params,
    uniform_fan,
)
from ..numeric.ops import DEFAULT_HUBER_THRESHOLD, RealMatrix, masked_huber_loss


class Variant(StrEnum):
    SIMPLE = "simple"
    BILAYER = "bilayer"
    VELOCITY = "velocity"


@dataclass(eq=False)
class DenseHead:
    weight: RealMatrix
    bias: RealMatrix

    @classmethod
    def zeros(cls, out_dim: int, in_dim: int) -> DenseHead:
        return cls(np.zeros((out_dim, in_dim)), np.zeros(out_dim))

    def forward(self, h: RealMatrix) -> RealMatrix:
        return h @ self.weight.T + self.bias

    def backward(self, h: RealMatrix, dout: RealMatrix) -> tuple[RealMatrix, RealMatrix, RealMatrix]:
        """Returns (dL/dh, dL/dweight, dL/dbias)."""
        return dout @ self.weight, dout.T @ h, dout.sum(axis=0)

    def arrays(self) -> dict[str, RealMatrix]:
        return {"weight": self.weight, "bias": self.bias}

    def copy(self) -> DenseHead:
        return DenseHead(self.weight.copy(), self.bias.copy())


@dataclass(eq=False)
class ForecastModel:
    variant: Variant
    trunk: GruParams
    delta_head: DenseHead
    stats: NormalizationStats
    value_head: DenseHead | None = None
    rate_head: DenseHead | None = None
    second_trunk: GruParams | None = None
    seed: int = 0

    def __post_init__(self) -> None:
        d, h = self.n_vars, self.hidden_dim
        if self.trunk.input_dim != 3 * d:
            raise InvalidInputError(f"trunk input must be 3*D={3 * d}, got {self.trunk.input_dim}")
        if self.stats.n_vars != d:
            raise InvalidInputError("normalization stats do not match the variable count")
        if self.variant is Variant.VELOCITY:
            if self.rate_head is None:
                raise InvalidInputError("velocity model needs a rate head")
        elif self.value_head is None:
            raise InvalidInputError(f"{self.variant} model needs a value head")
        if self.variant is Variant.BILAYER:
            if self.second_trunk is None or self.second_trunk.input_dim != 4 * d:
                raise InvalidInputError("bilayer model needs a second trunk with input 4*D")
        value_width = self.second_trunk.hidden_dim if self.second_trunk is not None else h
        for name, head, width in (
            ("value_head", self.value_head, value_width),
            ("rate_head", self.rate_head, h),
        ):
            if head is not None and head.weight.shape != (d, width):
                raise InvalidInputError(f"{name} must be ({d}, {width})")

    @property
    def n_vars(self) -> int:
        return int(self.delta_head.weight.shape[0])

    @property
    def hidden_dim(self) -> int:
        return self.trunk.hidden_dim

    def parameters(self) -> dict[str, RealMatrix]:
        """Views onto every learnable array, keyed ``<part>.<array>``."""
        parts: list[tuple[str, dict[str, RealMatrix] | None]] = [
            ("trunk", self.trunk.arrays()),
            ("second_trunk", self.second_trunk.arrays() if self.second_trunk else None),
            ("value_head", self.value_head.arrays() if self.value_head else None),
            ("delta_head", self.delta_head.arrays()),
            ("rate_head", self.rate_head.arrays() if self.rate_head else None),
        ]
        return {f"{part}.{k}": v for part, arrays in parts if arrays for k, v in arrays.items()}

    def parameter_count(self) -> int:
        return sum(int(p.size) for p in self.parameters().values())

    def copy(self) -> ForecastModel:
        return ForecastModel(
            variant=self.variant,
            trunk=self.trunk.copy(),
            delta_head=self.delta_head.copy(),
            stats=self.stats,
            value_head=self.value_head.copy() if self.value_head else None,
            rate_head=self.rate_head.copy() if self.rate_head else None,
            second_trunk=self.second_trunk.copy() if self.second_trunk else None,
            seed=self.seed,
        )


@dataclass(eq=False)
class Forecast:
    """Raw-unit forecasts; gaps are clamped at 0 seconds."""

    values: RealMatrix
    gaps: RealMatrix


@dataclass(eq=False)
class _Pass:
    values_n: RealMatrix
    gaps_n: RealMatrix
    h: RealMatrix
    caches: list[GruStepCache]
    h2: RealMatrix | None = None
    caches2: list[GruStepCache] | None = None
    rate: RealMatrix | None = None
    gap_raw: RealMatrix | None = None
    last: RealMatrix | None = None


def init_model(
    variant: Variant | str,
    n_vars: int,
    hidden_dim: int,
    seed: int = 0,
    stats: NormalizationStats | None = None,
) -> ForecastModel:
    """Random trunk(s) and value/gap heads; the velocity rate head starts at zero."""
    variant = Variant(variant)
    if n_vars < 1 or hidden_dim < 1:
        raise InvalidInputError("model dimensions must be >= 1")
    rng = np.random.default_rng(seed)
    d, h = n_vars, hidden_dim
    trunk = init_params(3 * d, h, rng)
    second = init_params(4 * d, h, rng) if variant is Variant.BILAYER else None
    value_head = None
    rate_head = None
    if variant is Variant.VELOCITY:
        # Zero rate means the untrained model forecasts persistence
        rate_head = DenseHead.zeros(d, h)
    else:
        value_head = DenseHead(uniform_fan(rng, d, h), np.zeros(d))
    delta_head = DenseHead(uniform_fan(rng, d, h), np.zeros(d))
    return ForecastModel(
        variant=variant,
        trunk=trunk,
        delta_head=delta_head,
        stats=stats if stats is not None else NormalizationStats.identity(d),
        value_head=value_head,
        rate_head=rate_head,
        second_trunk=second,
        seed=seed,
    )


def persistence_model(stats: NormalizationStats) -> ForecastModel:
    """Velocity model with every parameter zero: value forecast = last observed value."""
    d = stats.n_vars
    return ForecastModel(
        variant=Variant.VELOCITY,
        trunk=GruParams.zeros(3 * d, 1),
        delta_head=DenseHead.zeros(d, 1),
        stats=stats,
        rate_head=DenseHead.zeros(d, 1),
    )


def _check_inputs(model: ForecastModel, inputs: RealMatrix) -> RealMatrix:
    x = np.asarray(inputs, dtype=np.float64)
    if x.ndim == 2:
        x = x[None]
    if x.ndim != 3 or x.shape[2] != 3 * model.n_vars:
        raise InvalidInputError(f"windows must be (B, AR, {3 * model.n_vars}), got {np.shape(inputs)}")
    return x


def _run(model: ForecastModel, inputs: RealMatrix, last_values: RealMatrix | None) -> _Pass:
    x = _check_inputs(model, inputs)
    h, caches = gru_sequence_forward(x, None, model.trunk)
    gaps_n = model.delta_head.forward(h)

    if model.variant is Variant.SIMPLE:
        assert model.value_head is not None
        return _Pass(values_n=model.value_head.forward(h), gaps_n=gaps_n, h=h, caches=caches)

    if model.variant is Variant.BILAYER:
        assert model.value_head is not None and model.second_trunk is not None
        appended = np.broadcast_to(gaps_n[:, None, :], (x.shape[0], x.shape[1], model.n_vars))
        h2, caches2 = gru_sequence_forward(np.concatenate([x, appended], axis=2), None, model.second_trunk)
        return _Pass(
            values_n=model.value_head.forward(h2), gaps_n=gaps_n, h=h, caches=caches, h2=h2, caches2=caches2
        )

    assert model.rate_head is not None
    if last_values is None:
        raise InvalidInputError("velocity forecasts need the last observed values")
    last = np.atleast_2d(np.asarray(last_values, dtype=np.float64))
    if last.shape != gaps_n.shape:
        raise InvalidInputError(f"last values must be {gaps_n.shape}, got {last.shape}")
    rate = model.rate_head.forward(h)
    gap_raw = denormalize_gaps(gaps_n, model.stats)
    values_raw = last + rate * gap_raw
    return _Pass(
        values_n=normalize_values(values_raw, model.stats),
        gaps_n=gaps_n,
        h=h,
        caches=caches,
        rate=rate,
        gap_raw=gap_raw,
        last=last,
    )


def _to_forecast(model: ForecastModel, p: _Pass, single: bool) -> Forecast:
    gaps = np.maximum(denormalize_gaps(p.gaps_n, model.stats), 0.0)
    if p.rate is not None and p.last is not None:
        # Extrapolate over the clamped gap; training keeps the raw one
        values = p.last + p.rate * gaps
    else:
        values = denormalize_values(p.values_n, model.stats)
    if single:
        return Forecast(values=values[0], gaps=gaps[0])
    return Forecast(values=values, gaps=gaps)


def simple_forward(model: ForecastModel, window: RealMatrix) -> Forecast:
    if model.variant is not Variant.SIMPLE:
        raise InvalidInputError(f"simple_forward on a {model.variant} model")
    return _to_forecast(model, _run(model, window, None), np.ndim(window) == 2)


def bilayer_forward(model: ForecastModel, window: RealMatrix) -> Forecast:
    if model.variant is not Variant.BILAYER:
        raise InvalidInputError(f"bilayer_forward on a {model.variant} model")
    return _to_forecast(model, _run(model, window, None), np.ndim(window) == 2)


def velocity_forward(model: ForecastModel, window: RealMatrix, last_values: RealMatrix) -> Forecast:
    if model.variant is not Variant.VELOCITY:
        raise InvalidInputError(f"velocity_forward on a {model.variant} model")
    return _to_forecast(model, _run(model, window, last_values), np.ndim(window) == 2)


def forecast_batch(model: ForecastModel, inputs: RealMatrix, last_values: RealMatrix) -> Forecast:
    """Raw-unit forecasts for a batch of normalized windows, any variant."""
    return _to_forecast(model, _run(model, inputs, last_values), False)


def predict(model: ForecastModel, windows: WindowSet, batch_size: int = 4096) -> Forecast:
    """Chronological forecasts for every window of a normalized WindowSet."""
    if windows.count == 0:
        d = model.n_vars
        return Forecast(values=np.zeros((0, d)), gaps=np.zeros((0, d)))
    chunks = [
        forecast_batch(
            model, windows.inputs[i : i + batch_size], windows.last_values[i : i + batch_size]
        )
        for i in range(0, windows.count, batch_size)
    ]
    return Forecast(
        values=np.concatenate([c.values for c in chunks]),
        gaps=np.concatenate([c.gaps for c in chunks]),
    )


def normalized_outputs(
    model: ForecastModel, inputs: RealMatrix, last_values: RealMatrix | None = None
) -> tuple[RealMatrix, RealMatrix]:
    """(values, gaps) in normalized units, as the loss sees them; gaps unclamped."""
    p = _run(model, inputs, last_values)
    return p.values_n, p.gaps_n


def _loss_terms(
    p: _Pass,
    target_values: RealMatrix,
    target_gaps: RealMatrix,
    target_masks: RealMatrix,
    threshold: float,
    gap_weight: float,
) -> tuple[float, RealMatrix, RealMatrix]:
    tm = np.atleast_2d(target_masks)
    value_loss, d_values = masked_huber_loss(p.values_n, np.atleast_2d(target_values), tm, threshold)
    gap_loss, d_gaps = masked_huber_loss(p.gaps_n, np.atleast_2d(target_gaps), tm, threshold)
    return value_loss + gap_weight * gap_loss, d_values, gap_weight * d_gaps


def model_objective(
    model: ForecastModel,
    inputs: RealMatrix,
    target_values: RealMatrix,
    target_gaps: RealMatrix,
    target_masks: RealMatrix,
    last_values: RealMatrix | None = None,
    *,
    threshold: float = DEFAULT_HUBER_THRESHOLD,
    gap_weight: float = 1.0,
) -> float:
    """The ``model_loss`` value without the backward pass."""
    p = _run(model, inputs, last_values)
    return _loss_terms(p, target_values, target_gaps, target_masks, threshold, gap_weight)[0]


def model_loss(
    model: ForecastModel,
    inputs: RealMatrix,
    target_values: RealMatrix,
    target_gaps: RealMatrix,
    target_masks: RealMatrix,
    last_values: RealMatrix | None = None,
    *,
    threshold: float = DEFAULT_HUBER_THRESHOLD,
    gap_weight: float = 1.0,
) -> tuple[float, dict[str, RealMatrix]]:
    """Masked Huber loss on values plus ``gap_weight`` times the same on gaps.

    Targets are in normalized units; ``last_values`` (raw) is only read by the
    velocity variant. Gradients are keyed like ``model.parameters()``.
    """
    p = _run(model, inputs, last_values)
    loss, d_values, d_gaps = _loss_terms(p, target_values, target_gaps, target_masks, threshold, gap_weight)

    grads: dict[str, RealMatrix] = {}
    d = model.n_vars

    if model.variant is Variant.VELOCITY:
        assert model.rate_head is not None and p.rate is not None and p.gap_raw is not None
        d_raw = d_values / model.stats.value_scale
        d_rate = d_raw * p.gap_raw
        d_gaps = d_gaps + d_raw * p.rate * model.stats.gap_scale
        dh_rate, grads["rate_head.weight"], grads["rate_head.bias"] = model.rate_head.backward(p.h, d_rate)
        dh_gap, grads["delta_head.weight"], grads["delta_head.bias"] = model.delta_head.backward(p.h, d_gaps)
        dh = dh_rate + dh_gap
    elif model.variant is Variant.BILAYER:
        assert model.value_head is not None and model.second_trunk is not None
        assert p.h2 is not None and p.caches2 is not None
        dh2, grads["value_head.weight"], grads["value_head.bias"] = model.value_head.backward(p.h2, d_values)
        d_appended, _, second = gru_sequence_backward(p.caches2, model.second_trunk, dh2)
        grads.update({f"second_trunk.{k}": v for k, v in second.arrays().items()})
        d_gaps = d_gaps + d_appended[:, :, 3 * d :].sum(axis=1)
        dh, grads["delta_head.weight"], grads["delta_head.bias"] = model.delta_head.backward(p.h, d_gaps)
    else:
        assert model.value_head is not None
        dh_value, grads["value_head.weight"], grads["value_head.bias"] = model.value_head.backward(p.h, d_values)
        dh_gap, grads["delta_head.weight"], grads["delta_head.bias"] = model.delta_head.backward(p.h, d_gaps)
        dh = dh_value + dh_gap

    _, _, trunk = gru_sequence_backward(p.caches, model.trunk, dh)
    grads.update({f"trunk.{k}": v for k, v in trunk.arrays().items()})
    return loss, {name: grads[name] for name in model.parameters()}
