from __future__ import annotations

import os
import sys
from pathlib import Path

import numpy as np
import pytest

# Ensure the repository root is importable without an install
REPO_ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
if REPO_ROOT not in sys.path:
    sys.path.insert(0, REPO_ROOT)

from sporadic.data.series import SporadicSeries, build_mask_delta, forward_impute  # noqa: E402
from sporadic.data.windows import WindowSet, apply_normalization, fit_normalization, make_windows  # noqa: E402
from sporadic.training.synthetic import SyntheticStream, sine_stream, stream_records, write_lab_file  # noqa: E402


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(1234)


@pytest.fixture
def stream() -> SyntheticStream:
    return sine_stream(n_steps=120, n_sensors=2, missing_rate=0.4, seed=3)


@pytest.fixture
def series(stream: SyntheticStream) -> SporadicSeries:
    return build_mask_delta(stream.events)


@pytest.fixture
def windows(series: SporadicSeries) -> WindowSet:
    """Normalized AR=4 windows over the whole synthetic series."""
    raw = make_windows(forward_impute(series, 20.0), 4)
    return apply_normalization(raw, fit_normalization(raw))


@pytest.fixture
def lab_file(tmp_path: Path) -> Path:
    """A four-sensor synthetic log in the corpus line format, plus a few junk lines."""
    fixture = sine_stream(n_steps=150, n_sensors=4, missing_rate=0.3, seed=11, jitter=2.0)
    path = tmp_path / "data.txt"
    write_lab_file(stream_records(fixture, [1, 2, 3, 4]), path)
    with open(path, "a", encoding="utf-8") as f:
        f.write("\n")
        f.write("2004-02-28 00:59:16.02785 2\n")
        f.write("garbage line with words\n")
        f.write("2004-02-28 01:00:00.0 3 99 20.0 30.0 1.0 2.5\n")
    return path
