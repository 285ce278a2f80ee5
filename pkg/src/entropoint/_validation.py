"""Input validation helpers shared by the estimator layer."""

from __future__ import annotations

import numpy as np


def check_points(X) -> np.ndarray:
    """Validate an (n, 2) array of (x, t) query points with finite x and t >= 0."""
    X = np.asarray(X, dtype=float)
    if X.ndim == 1 and X.size == 2:
        X = X[None, :]
    if X.ndim != 2 or X.shape[1] != 2:
        raise ValueError(f"expected points of shape (n, 2), got {X.shape}")
    if not np.all(np.isfinite(X)):
        raise ValueError("query points must be finite")
    if np.any(X[:, 1] < 0):
        raise ValueError("query times must be nonnegative")
    return X


def check_interval(interval) -> tuple[float, float]:
    lo, hi = float(interval[0]), float(interval[-1])
    if not lo < hi:
        raise ValueError(f"interval must satisfy lo < hi, got [{lo}, {hi}]")
    return lo, hi
