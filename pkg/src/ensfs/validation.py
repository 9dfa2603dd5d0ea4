"""Small input-validation helpers shared by estimators and metrics."""

from __future__ import annotations

import numpy as np

from .exceptions import DimensionMismatch, EmptyTrainingSet, LengthMismatch


def check_matrix(X, name: str = "X") -> np.ndarray:
    """Coerce to a 2-D float64 array with finite entries."""
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2:
        raise DimensionMismatch(f"{name} must be 2-dimensional, got shape {X.shape}")
    if not np.all(np.isfinite(X)):
        raise ValueError(f"{name} contains non-finite values")
    return X


def check_vector(y, name: str = "y") -> np.ndarray:
    """Coerce to a 1-D float64 array with finite entries."""
    y = np.asarray(y, dtype=np.float64)
    if y.ndim != 1:
        raise DimensionMismatch(f"{name} must be 1-dimensional, got shape {y.shape}")
    if not np.all(np.isfinite(y)):
        raise ValueError(f"{name} contains non-finite values")
    return y


def check_X_y(X, y) -> tuple[np.ndarray, np.ndarray]:
    """Validate a paired design matrix and target vector."""
    X = check_matrix(X)
    y = check_vector(y)
    if X.shape[0] != y.shape[0]:
        raise LengthMismatch(
            f"X has {X.shape[0]} rows but y has {y.shape[0]} entries"
        )
    if X.shape[0] == 0:
        raise EmptyTrainingSet("no rows to fit on")
    return X, y


def check_same_length(a, b, names: tuple[str, str] = ("a", "b")) -> None:
    if len(a) != len(b):
        raise LengthMismatch(
            f"{names[0]} has length {len(a)} but {names[1]} has length {len(b)}"
        )
