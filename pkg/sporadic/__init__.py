"""Forecast values and report times of sparse, irregularly sampled sensor series."""

__version__ = "0.1.0"
