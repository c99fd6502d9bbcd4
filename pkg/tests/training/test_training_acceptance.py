"""Training-heavy checks on the synthetic sine fixture."""

from __future__ import annotations

import numpy as np
import pytest

from sporadic.data.series import build_mask_delta
from sporadic.data.windows import normalize_values
from sporadic.models.forecaster import Variant, init_model, predict
from sporadic.training.ablation import AblationMode, ablate
from sporadic.training.config import RunConfig, TrainConfig
from sporadic.training.pipeline import prepare
from sporadic.training.synthetic import sine_stream
from sporadic.training.trainer import train

pytestmark = pytest.mark.integration

ABLATION_TRAIN = {
    "ar": 8,
    "hidden": 16,
    "epochs": 40,
    "batch_size": 32,
    "learning_rate": 1e-2,
    "lr_decays": 4,
}


def test_simple_model_overfits_the_sine_fixture() -> None:
    series = build_mask_delta(sine_stream(n_steps=500, n_sensors=2, missing_rate=0.4, seed=0).events)
    data = prepare(series, ar=8, test_fraction=0.1)
    windows = data.train
    model = init_model(Variant.SIMPLE, 2, 32, seed=0, stats=data.stats)
    config = TrainConfig(
        ar=8, hidden=32, epochs=200, batch_size=32, learning_rate=1e-2, lr_decays=8
    )
    result = train(model, windows, config)

    predicted = normalize_values(predict(result.model, windows).values, data.stats)
    observed = windows.target_masks > 0
    mae = float(np.abs(predicted - windows.target_values)[observed].mean())
    assert mae < 0.05

    half = len(result.history) // 2
    assert max(result.history[half:]) <= 1.05 * result.history[half]


@pytest.mark.parametrize("mode", list(AblationMode))
def test_ablations_do_not_beat_the_baseline_for_any_seed(mode: AblationMode) -> None:
    series = build_mask_delta(sine_stream(n_steps=300, n_sensors=2, missing_rate=0.6, seed=12).events)
    for seed in range(5):
        config = RunConfig.model_validate({"seed": seed, **ABLATION_TRAIN})
        report = ablate(series, mode, config)
        assert report.seed == seed
        baseline, ablated = report.baseline.value_mae, report.ablated.value_mae
        assert baseline is not None and ablated is not None
        if mode is AblationMode.NO_IMPUTATION:
            assert ablated > baseline, f"seed {seed}: {ablated} <= {baseline}"
        else:
            assert ablated >= baseline, f"seed {seed}: {ablated} < {baseline}"
