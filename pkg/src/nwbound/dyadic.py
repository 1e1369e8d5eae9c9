"""Dyadic-grid majority-vote classifier.

Training points are binned into a regular grid of 2^m cells per dimension
over the training bounding box; only occupied cells are stored, each with
its per-class count vector. Prediction is a single hash lookup returning
the cell's majority class. There is no kernel and no confidence bound in
this variant; it trades both for near-constant query time. Callers who
need bounds should use the regular or localized estimators.
"""

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin

from .validation import as_feature_matrix, as_label_vector, as_query_matrix

__all__ = ["DyadicGridClassifier"]

from .estimators import ABSTAIN

# tuple cell keys cannot overflow, but the cell count 2^(resolution * d)
# still explodes; refuse configurations beyond this product outright
_MAX_RESOLUTION_BITS = 1024


class DyadicGridClassifier(BaseEstimator, ClassifierMixin):
    """Grid-cell majority classifier with hash-table lookups.

    Parameters
    ----------
    resolution : int, default 4
        Per-dimension resolution exponent m; the box splits into 2^m
        cells along every dimension.
    out_of_box_tolerance : float, default 0.1
        Queries beyond the training box are clamped into the boundary
        cells while within this fraction of the per-dimension box width;
        farther out the classifier abstains.
    n_classes : int, optional
        Class count; inferred as max(y) + 1 when omitted.

    Notes
    -----
    A dimension with zero spread in the training data collapses to a
    single cell; its width is 0 and out-of-box queries along it abstain
    unless they match the training value exactly.
    """

    def __init__(self, resolution=4, out_of_box_tolerance=0.1, n_classes=None):
        self.resolution = resolution
        self.out_of_box_tolerance = out_of_box_tolerance
        self.n_classes = n_classes

    def fit(self, X, y):
        """Bin the training points; a single vectorized pass."""
        m = int(self.resolution)
        if m < 1:
            raise ValueError(f"resolution must be positive, got {self.resolution}")
        if float(self.out_of_box_tolerance) < 0:
            raise ValueError(
                f"out_of_box_tolerance must be non-negative, got {self.out_of_box_tolerance}")
        X = as_feature_matrix(X)
        y = as_label_vector(y, X.shape[0])
        if m * X.shape[1] > _MAX_RESOLUTION_BITS:
            raise ValueError(
                f"grid capacity exceeded: resolution*d = {m * X.shape[1]} "
                f"(limit {_MAX_RESOLUTION_BITS}); the cell count 2^(m*d) is unusable")
        if self.n_classes is not None:
            c = int(self.n_classes)
            if c < 1:
                raise ValueError(f"n_classes must be positive, got {self.n_classes}")
            if y.max() >= c:
                raise ValueError(f"label {y.max()} out of range for n_classes={c}")
        else:
            c = int(y.max()) + 1
        self.n_classes_ = c
        self.classes_ = np.arange(c)
        self.n_features_in_ = X.shape[1]
        self.resolution_ = m
        self.box_min_ = X.min(axis=0)
        self.box_max_ = X.max(axis=0)
        self.cell_width_ = (self.box_max_ - self.box_min_) / float(2 ** m)
        coords = self._cell_coords(X)
        cells, inverse = np.unique(coords, axis=0, return_inverse=True)
        flat = inverse * c + y
        counts = np.bincount(flat, minlength=cells.shape[0] * c)
        counts = counts.reshape(cells.shape[0], c)
        # keys kept in the unique() lexicographic order for stable export
        self._cell_keys_ = [tuple(int(v) for v in row) for row in cells]
        self._cell_counts_ = counts
        self.cells_ = dict(zip(self._cell_keys_, counts))
        return self

    def _cell_coords(self, X):
        """Integer cell coordinates, clamped to [0, 2^m - 1] per dimension."""
        width = self.cell_width_
        safe = np.where(width > 0, width, 1.0)
        raw = np.floor((X - self.box_min_) / safe)
        raw[:, width == 0] = 0.0
        limit = 2 ** self.resolution_ - 1
        return np.clip(raw, 0, limit).astype(np.int64)

    def _check_fitted(self):
        if not hasattr(self, "cells_"):
            raise ValueError(f"{type(self).__name__} is not fitted yet")

    def predict(self, X):
        """Majority class of each query's cell; ABSTAIN (-1) when the cell
        is unpopulated or the query lies too far outside the training box."""
        self._check_fitted()
        Q = as_query_matrix(X, self.n_features_in_)
        if Q.shape[0] == 0:
            return np.zeros(0, dtype=np.int64)
        tol = float(self.out_of_box_tolerance) * (self.box_max_ - self.box_min_)
        outside = np.any((Q < self.box_min_ - tol) | (Q > self.box_max_ + tol),
                         axis=1)
        clamped = np.clip(Q, self.box_min_, self.box_max_)
        coords = self._cell_coords(clamped)
        pred = np.empty(Q.shape[0], dtype=np.int64)
        for i in range(Q.shape[0]):
            if outside[i]:
                pred[i] = ABSTAIN
                continue
            counts = self.cells_.get(tuple(coords[i].tolist()))
            pred[i] = ABSTAIN if counts is None else int(np.argmax(counts))
        return pred

    def cell_counts(self, y):
        """Per-class counts of the cell containing a single point, or None."""
        self._check_fitted()
        pred_input = np.asarray(y, dtype=np.float64).reshape(1, -1)
        Q = as_query_matrix(pred_input, self.n_features_in_)
        clamped = np.clip(Q, self.box_min_, self.box_max_)
        coords = self._cell_coords(clamped)
        counts = self.cells_.get(tuple(coords[0].tolist()))
        return None if counts is None else counts.copy()

    def export_grid(self):
        """Yield (cell coords, counts, majority class) rows.

        Rows come in lexicographic coordinate order; counts across all
        rows sum to the training size.
        """
        self._check_fitted()
        for key, counts in zip(self._cell_keys_, self._cell_counts_):
            yield key, counts.copy(), int(np.argmax(counts))
