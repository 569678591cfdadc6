"""Input checks shared by the estimator wrapper."""

from __future__ import annotations

import numpy as np

from .errors import ConfigurationError


def check_xt(XT) -> np.ndarray:
    """Return a float array of shape (n, 2) holding (X, T) rows with T > 0."""
    arr = np.asarray(XT, dtype=float)
    if arr.ndim == 1 and arr.size == 2:
        arr = arr[None, :]
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise ConfigurationError(f"expected an array of (X, T) rows, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ConfigurationError("X and T must be finite")
    if np.any(arr[:, 1] <= 0):
        raise ConfigurationError("T must be positive")
    return arr


def check_nodes(n) -> int:
    n = int(n)
    if n < 16:
        raise ConfigurationError("nodes must be at least 16")
    return n


def check_precision(precision: str) -> str:
    if precision not in ("double", "high"):
        raise ConfigurationError(f"unknown precision {precision!r}")
    return precision
