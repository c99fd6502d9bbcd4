from __future__ import annotations

from pathlib import Path

import numpy as np
import pytest

from sporadic.core.errors import DataFileError
from sporadic.data.windows import WindowSet
from sporadic.gru.cell import init_params
from sporadic.gru.checkpoint import save_gru
from sporadic.models.checkpoint import FORMAT_VERSION, load_model, save_model
from sporadic.models.forecaster import Variant, init_model, predict


@pytest.mark.parametrize("variant", list(Variant))
def test_model_round_trip(tmp_path: Path, windows: WindowSet, variant: Variant) -> None:
    model = init_model(variant, windows.n_vars, 5, seed=21, stats=windows.stats)
    path = tmp_path / f"{variant}.ckpt"
    save_model(path, model, ar=windows.ar, gap_weight=0.5)

    loaded, meta = load_model(path)
    assert meta["format"] == FORMAT_VERSION
    assert meta["ar"] == windows.ar
    assert meta["gap_weight"] == 0.5
    assert loaded.variant is variant
    assert loaded.seed == 21
    assert list(loaded.parameters()) == list(model.parameters())
    for name, arr in model.parameters().items():
        assert loaded.parameters()[name].tobytes() == arr.tobytes()
    for name, arr in model.stats.arrays().items():
        np.testing.assert_array_equal(loaded.stats.arrays()[name], arr)
    np.testing.assert_array_equal(predict(loaded, windows).values, predict(model, windows).values)


def test_load_rejects_foreign_checkpoints(tmp_path: Path) -> None:
    gru_only = tmp_path / "gru.ckpt"
    save_gru(gru_only, init_params(3, 2, 0), seed=0)
    with pytest.raises(DataFileError):
        load_model(gru_only)

    text = tmp_path / "notes.ckpt"
    text.write_text("hello\n")
    with pytest.raises(DataFileError):
        load_model(text)


def test_load_rejects_truncated_model(tmp_path: Path) -> None:
    path = tmp_path / "model.ckpt"
    save_model(path, init_model(Variant.SIMPLE, 2, 3), ar=3)
    blob = path.read_bytes()
    path.write_bytes(blob[:-16])
    with pytest.raises(DataFileError):
        load_model(path)


def test_load_rejects_unreadable_header(tmp_path: Path) -> None:
    path = tmp_path / "bad.ckpt"
    path.write_bytes(b"SPGRU1\n{not json\n")
    with pytest.raises(DataFileError):
        load_model(path)
