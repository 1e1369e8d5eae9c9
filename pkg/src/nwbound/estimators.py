"""Kernel-weighted class-probability estimators.

Both estimators share the same local estimate: each training point gets a
bandwidth-scaled kernel weight, weights are accumulated per class, and the
class scores are divided by the total local mass kappa. When kappa is zero
the estimator abstains instead of inventing a probability vector.

`RegularNWClassifier` scans every training point per query. The localized
variant restricts the sum to the k nearest neighbours found by a k-d tree,
trading some local mass (and therefore looser bounds) for query speed.
"""

import warnings
from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin

from .kdtree import KdTree
from .kernels import KernelSpec, _scaled_weights
from .validation import as_feature_matrix, as_label_vector, as_query_matrix, as_query_vector

__all__ = ["ABSTAIN", "ProbabilityEstimate", "RegularNWClassifier", "LocalizedNWClassifier"]

ABSTAIN = -1

# soft cap on scratch cells (query block x training points x dims) per chunk
_CHUNK_CELLS = 4_000_000


@dataclass(frozen=True)
class ProbabilityEstimate:
    """Per-query estimate: class probabilities plus the local kernel mass.

    When ``abstained`` is set, ``kappa`` is 0 and ``probs`` holds the
    uniform vector 1/C as a flagged placeholder, never a real estimate.
    For non-truncated kernels the normalized per-sample weights and
    distances are carried along, since tail-aware bias bounds need them.
    """

    probs: np.ndarray
    kappa: float
    abstained: bool
    weights: np.ndarray = None
    distances: np.ndarray = None

    @property
    def predicted_class(self):
        """Argmax class index (lowest index wins ties), or ABSTAIN."""
        if self.abstained:
            return ABSTAIN
        return int(np.argmax(self.probs))

    @property
    def confidence(self):
        """Probability of the predicted class; 1/C when abstained."""
        return float(np.max(self.probs))


def _estimate_from_weights(w, dist, labels, num_classes, keep_weights):
    kappa = float(w.sum())
    if kappa <= 0.0:
        probs = np.full(num_classes, 1.0 / num_classes)
        return ProbabilityEstimate(probs, 0.0, True)
    scores = np.bincount(labels, weights=w, minlength=num_classes)
    if keep_weights:
        return ProbabilityEstimate(scores / kappa, kappa, False,
                                   weights=w / kappa, distances=dist.copy())
    return ProbabilityEstimate(scores / kappa, kappa, False)


class _KernelNWBase(BaseEstimator, ClassifierMixin):
    """Shared fit/validation/prediction surface of the kernel estimators."""

    def _fit_arrays(self, X, y):
        X = as_feature_matrix(X)
        y = as_label_vector(y, X.shape[0])
        if self.n_classes is not None:
            c = int(self.n_classes)
            if c < 1:
                raise ValueError(f"n_classes must be positive, got {self.n_classes}")
            if y.size and y.max() >= c:
                raise ValueError(f"label {y.max()} out of range for n_classes={c}")
        else:
            c = int(y.max()) + 1
        self.kernel_spec_ = KernelSpec(self.kernel, self.bandwidth, self.truncate)
        self.X_ = X
        self.y_ = y
        self.n_classes_ = c
        self.classes_ = np.arange(c)
        self.n_features_in_ = X.shape[1]
        return X, y

    def _check_fitted(self):
        if not hasattr(self, "X_"):
            raise ValueError(f"{type(self).__name__} is not fitted yet")

    def estimate(self, y):
        raise NotImplementedError

    def estimate_batch(self, X):
        """List of ProbabilityEstimate, one per query row."""
        self._check_fitted()
        Q = as_query_matrix(X, self.n_features_in_)
        return [self.estimate(q) for q in Q]

    def predict_proba(self, X):
        """Class-probability matrix, shape (m, C).

        Abstaining rows hold the uniform vector; use ``estimate_batch``
        or ``predict`` to see which rows abstained.
        """
        ests = self.estimate_batch(X)
        if not ests:
            return np.zeros((0, self.n_classes_))
        return np.vstack([e.probs for e in ests])

    def predict(self, X):
        """Predicted class index per query; ABSTAIN (-1) marks abstentions."""
        ests = self.estimate_batch(X)
        return np.asarray([e.predicted_class for e in ests], dtype=np.int64)


class RegularNWClassifier(_KernelNWBase):
    """Kernel-weighted classifier scanning all training points per query.

    Parameters
    ----------
    kernel : str, default "epanechnikov"
        Kernel family name.
    bandwidth : float, default 1.0
        Kernel length scale; with compact kernels, training points beyond
        this distance contribute nothing.
    truncate : bool, default True
        Zero weights beyond one bandwidth (gaussian only may disable).
    n_classes : int, optional
        Class count; inferred as max(y) + 1 when omitted.

    Examples
    --------
    >>> clf = RegularNWClassifier(bandwidth=0.2).fit([[0.0], [0.3]], [0, 1])
    >>> clf.predict([[0.05]])
    array([0])
    """

    def __init__(self, kernel="epanechnikov", bandwidth=1.0, truncate=True,
                 n_classes=None):
        self.kernel = kernel
        self.bandwidth = bandwidth
        self.truncate = truncate
        self.n_classes = n_classes

    def fit(self, X, y):
        """Store the training set; nothing is precomputed."""
        self._fit_arrays(X, y)
        return self

    def kappa(self, y):
        """Local kernel mass at a single point."""
        return self.estimate(y).kappa

    def _block_weights(self, Q):
        """Distances and kernel weights of a query block against all points.

        The arithmetic is per query row (difference, square, reduce over
        the feature axis), so results do not depend on how queries are
        batched together.
        """
        diff = Q[:, None, :] - self.X_[None, :, :]
        dist = np.sqrt((diff * diff).sum(axis=2))
        return dist, _scaled_weights(self.kernel_spec_, dist)

    def estimate(self, y):
        """Full per-query estimate for a single point."""
        self._check_fitted()
        q = as_query_vector(y, self.n_features_in_)
        dist, w = self._block_weights(q[None, :])
        return _estimate_from_weights(
            w[0], dist[0], self.y_, self.n_classes_,
            keep_weights=not self.kernel_spec_.truncate)

    def estimate_batch(self, X):
        self._check_fitted()
        Q = as_query_matrix(X, self.n_features_in_)
        keep = not self.kernel_spec_.truncate
        step = self._block_step()
        out = []
        for lo in range(0, Q.shape[0], step):
            dist, w = self._block_weights(Q[lo:lo + step])
            for i in range(w.shape[0]):
                out.append(_estimate_from_weights(
                    w[i], dist[i], self.y_, self.n_classes_, keep_weights=keep))
        return out

    def _block_step(self):
        n, d = self.X_.shape
        return max(1, _CHUNK_CELLS // max(1, n * d))


class LocalizedNWClassifier(_KernelNWBase):
    """Kernel-weighted classifier over the k nearest neighbours only.

    Fitting builds a k-d tree; each query looks up its ``n_neighbors``
    nearest training points and evaluates the same weighted estimate over
    that set. The local mass can only shrink relative to the full scan,
    so the resulting confidence bounds are conservative.

    Parameters
    ----------
    kernel, bandwidth, truncate, n_classes
        As in :class:`RegularNWClassifier`.
    n_neighbors : int, default 50
        Neighbour count k; clamped to n (with a warning) when larger.
    leaf_size : int, default 16
        k-d tree bucket size.
    """

    def __init__(self, kernel="epanechnikov", bandwidth=1.0, truncate=True,
                 n_neighbors=50, leaf_size=16, n_classes=None):
        self.kernel = kernel
        self.bandwidth = bandwidth
        self.truncate = truncate
        self.n_neighbors = n_neighbors
        self.leaf_size = leaf_size
        self.n_classes = n_classes

    def fit(self, X, y):
        """Build the k-d tree over the training points."""
        k = int(self.n_neighbors)
        if k < 1:
            raise ValueError(f"n_neighbors must be positive, got {self.n_neighbors}")
        X, _ = self._fit_arrays(X, y)
        if k > X.shape[0]:
            warnings.warn(
                f"n_neighbors={k} exceeds the {X.shape[0]} training points; "
                "clamping to n", stacklevel=2)
            k = X.shape[0]
        self.n_neighbors_ = k
        self.tree_ = KdTree(X, leaf_size=self.leaf_size)
        return self

    def knn(self, y, k=None):
        """Nearest neighbours of a point: (indices, distances), ascending.

        Ties at equal distance resolve to the lower training index. ``k``
        defaults to the fitted neighbour count.
        """
        self._check_fitted()
        if k is None:
            k = self.n_neighbors_
        return self.tree_.query(y, k)

    def estimate(self, y):
        """Per-query estimate restricted to the k nearest neighbours."""
        self._check_fitted()
        idx, dist = self.knn(y)
        w = _scaled_weights(self.kernel_spec_, dist)
        return _estimate_from_weights(
            w, dist, self.y_[idx], self.n_classes_,
            keep_weights=not self.kernel_spec_.truncate)
