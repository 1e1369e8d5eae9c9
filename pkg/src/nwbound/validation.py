"""Input validation helpers shared by the estimators and the dataset container."""

import numpy as np

__all__ = [
    "as_feature_matrix",
    "as_label_vector",
    "as_query_vector",
    "as_query_matrix",
]


def as_feature_matrix(X, name="X"):
    """Coerce to a contiguous (n, d) float64 matrix with finite entries."""
    arr = np.ascontiguousarray(X, dtype=np.float64)
    if arr.ndim != 2:
        raise ValueError(f"{name} must be 2-dimensional, got shape {arr.shape}")
    if arr.shape[0] < 1:
        raise ValueError(f"{name} must contain at least one row")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite values")
    return arr


def as_label_vector(y, n_rows, name="y"):
    """Coerce to an (n,) int64 vector of non-negative class indices.

    Float inputs are accepted only when every entry is an exact integer.
    """
    arr = np.asarray(y)
    if arr.ndim != 1:
        raise ValueError(f"{name} must be 1-dimensional, got shape {arr.shape}")
    if arr.shape[0] != n_rows:
        raise ValueError(f"{name} has {arr.shape[0]} entries for {n_rows} rows")
    if arr.dtype.kind == "f":
        if not np.all(np.isfinite(arr)) or np.any(arr != np.floor(arr)):
            raise ValueError(f"{name} has non-integral label values")
        arr = arr.astype(np.int64)
    elif arr.dtype.kind in "iu":
        arr = arr.astype(np.int64)
    else:
        raise ValueError(f"{name} must be integer class indices, got dtype {arr.dtype}")
    if arr.size and arr.min() < 0:
        raise ValueError(f"{name} contains negative class indices")
    return arr


def as_query_vector(y, n_features):
    """Coerce a single query point to a (d,) float64 vector."""
    arr = np.ascontiguousarray(y, dtype=np.float64)
    if arr.ndim != 1 or arr.shape[0] != n_features:
        raise ValueError(
            f"query must be a vector of dimension {n_features}, got shape {arr.shape}"
        )
    if not np.all(np.isfinite(arr)):
        raise ValueError("query contains non-finite values")
    return arr


def as_query_matrix(X, n_features, name="X"):
    """Coerce a query batch to an (m, d) float64 matrix; m may be 0."""
    arr = np.ascontiguousarray(X, dtype=np.float64)
    if arr.ndim == 1 and arr.size == 0:
        arr = arr.reshape(0, n_features)
    if arr.ndim != 2:
        raise ValueError(f"{name} must be 2-dimensional, got shape {arr.shape}")
    if arr.shape[0] and arr.shape[1] != n_features:
        raise ValueError(
            f"{name} has dimension {arr.shape[1]}, model expects {n_features}"
        )
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite values")
    return arr
