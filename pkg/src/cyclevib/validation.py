"""Input validation helpers shared by the estimator, data and model layers."""

from __future__ import annotations

import numpy as np

from .errors import NumericError, ShapeError


def check_matrix(X, name: str = "X", n_cols: int | None = None, min_rows: int = 1) -> np.ndarray:
    """Coerce to a finite 2-D float64 array, or raise."""
    arr = np.asarray(X, dtype=np.float64)
    if arr.ndim != 2:
        raise ShapeError(f"{name} must be 2-D, got ndim={arr.ndim}")
    if n_cols is not None and arr.shape[1] != n_cols:
        raise ShapeError(f"{name} must have {n_cols} columns, got {arr.shape[1]}")
    if arr.shape[0] < min_rows:
        raise ShapeError(f"{name} needs at least {min_rows} rows, got {arr.shape[0]}")
    if not np.all(np.isfinite(arr)):
        raise NumericError(f"{name} contains non-finite values")
    return arr


def check_vector(x, name: str = "x", length: int | None = None) -> np.ndarray:
    arr = np.asarray(x, dtype=np.float64)
    if arr.ndim != 1:
        raise ShapeError(f"{name} must be 1-D, got ndim={arr.ndim}")
    if length is not None and arr.shape[0] != length:
        raise ShapeError(f"{name} must have length {length}, got {arr.shape[0]}")
    if not np.all(np.isfinite(arr)):
        raise NumericError(f"{name} contains non-finite values")
    return arr
