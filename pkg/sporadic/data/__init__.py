from .series import (
    Event,
    Events,
    SporadicSeries,
    build_mask_delta,
    compute_gaps,
    events_from_series,
    forward_impute,
    observed_fraction,
    observed_means,
    zero_impute,
)
from .windows import (
    NormalizationStats,
    WindowSet,
    apply_normalization,
    denormalize,
    denormalize_gaps,
    denormalize_values,
    fit_normalization,
    make_windows,
    read_windows,
    write_windows,
)

__all__ = [
    "Event",
    "Events",
    "SporadicSeries",
    "build_mask_delta",
    "compute_gaps",
    "events_from_series",
    "forward_impute",
    "zero_impute",
    "observed_fraction",
    "observed_means",
    "NormalizationStats",
    "WindowSet",
    "make_windows",
    "fit_normalization",
    "apply_normalization",
    "denormalize",
    "denormalize_values",
    "denormalize_gaps",
    "write_windows",
    "read_windows",
]
