"""Input validation helpers shared by the estimator-style classes."""

import numpy as np
from sklearn.exceptions import NotFittedError

from .errors import WidthMismatchError


def as_float_matrix(X, name="X") -> np.ndarray:
    arr = np.asarray(X, dtype=np.float64)
    if arr.ndim != 2:
        raise ValueError(f"{name} must be 2-D, got shape {arr.shape}")
    if arr.size and not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains NaN or Inf")
    return arr


def as_label_vector(y, n_rows=None, name="y") -> np.ndarray:
    arr = np.asarray(y, dtype=np.int64)
    if arr.ndim != 1:
        raise ValueError(f"{name} must be 1-D, got shape {arr.shape}")
    if n_rows is not None and arr.shape[0] != n_rows:
        raise ValueError(f"{name} has {arr.shape[0]} entries for {n_rows} rows")
    return arr


def check_fitted(estimator, attribute) -> None:
    if not hasattr(estimator, attribute):
        raise NotFittedError(
            f"{type(estimator).__name__} is not fitted; call fit() first"
        )


def check_width(X, expected, name="X") -> None:
    if X.shape[1] != expected:
        raise WidthMismatchError(
            f"{name} has {X.shape[1]} features, model was trained on {expected}"
        )
