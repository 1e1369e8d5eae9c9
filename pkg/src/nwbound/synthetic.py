"""Synthetic data generators with analytically known structure.

Two families: an overlapping binary dataset whose class-1 probability is a
logistic ramp along a fixed direction (maximum slope k/4, so the smoothness
constant is known exactly), and a margin-separated multi-class dataset of
uniform balls whose centers are spaced so that samples from different
classes are never closer than a prescribed margin.
"""

import math
from dataclasses import dataclass

import numpy as np

from .data import LabeledDataset
from .validation import as_feature_matrix

__all__ = [
    "LogisticGroundTruth",
    "MarginClusterConfig",
    "generate_overlapping",
    "generate_margin",
    "max_gradient_check",
]


@dataclass(frozen=True)
class LogisticGroundTruth:
    """Ground truth p_1(y) = 1 / (1 + exp(-k (w . y + b))).

    ``w`` must be unit-norm (within 1e-12); ``k`` is the positive logistic
    steepness. The maximum gradient of p_1, attained on the hyperplane
    ``w . y + b = 0``, is exactly ``k / 4``.
    """

    w: np.ndarray
    b: float
    k: float

    def __post_init__(self):
        w = np.ascontiguousarray(self.w, dtype=np.float64)
        if w.ndim != 1 or w.size < 1:
            raise ValueError("w must be a non-empty vector")
        if abs(float(np.linalg.norm(w)) - 1.0) > 1e-12:
            raise ValueError(f"w must be unit-norm, got norm {np.linalg.norm(w)!r}")
        if not (math.isfinite(self.k) and self.k > 0):
            raise ValueError(f"steepness k must be positive, got {self.k!r}")
        w.setflags(write=False)
        object.__setattr__(self, "w", w)
        object.__setattr__(self, "b", float(self.b))
        object.__setattr__(self, "k", float(self.k))

    @property
    def d(self):
        return self.w.size

    @property
    def lipschitz(self):
        """Exact smoothness constant of p_1, equal to k / 4."""
        return self.k / 4.0

    def prob_class1(self, Y):
        """Vectorized p_1 over a (m, d) matrix or a single (d,) point."""
        Y = np.asarray(Y, dtype=np.float64)
        t = Y @ self.w + self.b
        # stable logistic for both tail directions
        out = np.empty_like(t, dtype=np.float64)
        pos = t >= 0
        out[pos] = 1.0 / (1.0 + np.exp(-self.k * t[pos]))
        e = np.exp(self.k * t[~pos])
        out[~pos] = e / (1.0 + e)
        return out

    def class_probs(self, Y):
        """Per-class probabilities, shape (m, 2) (or (2,) for one point)."""
        p1 = self.prob_class1(Y)
        return np.stack([1.0 - p1, p1], axis=-1)


@dataclass(frozen=True)
class MarginClusterConfig:
    """Configuration for the margin-separated cluster generator.

    Centers are placed with pairwise distance >= gamma + 2 * radius, so any
    two samples from different classes are at least ``gamma`` apart.
    """

    gamma: float
    num_classes: int
    radius: float
    points_per_class: int
    box: tuple

    def __post_init__(self):
        if not (math.isfinite(self.gamma) and self.gamma > 0):
            raise ValueError(f"gamma must be positive, got {self.gamma!r}")
        if int(self.num_classes) < 1:
            raise ValueError(f"num_classes must be positive, got {self.num_classes}")
        if not (math.isfinite(self.radius) and self.radius >= 0):
            raise ValueError(f"radius must be non-negative, got {self.radius!r}")
        if int(self.points_per_class) < 1:
            raise ValueError(
                f"points_per_class must be positive, got {self.points_per_class}"
            )
        lo, hi = _check_box(self.box)
        object.__setattr__(self, "num_classes", int(self.num_classes))
        object.__setattr__(self, "points_per_class", int(self.points_per_class))
        object.__setattr__(self, "box", (lo, hi))


def _check_box(box):
    lo, hi = box
    lo = np.ascontiguousarray(lo, dtype=np.float64)
    hi = np.ascontiguousarray(hi, dtype=np.float64)
    if lo.ndim != 1 or lo.shape != hi.shape:
        raise ValueError("box must be a (low, high) pair of equal-length vectors")
    if not np.all(hi > lo):
        raise ValueError("box must be non-degenerate (high > low in every dimension)")
    lo.setflags(write=False)
    hi.setflags(write=False)
    return lo, hi


def generate_overlapping(truth, n, input_box, seed):
    """Sample an overlapping binary dataset from a logistic ground truth.

    Features are uniform over ``input_box``; each label is Bernoulli with
    the ground-truth class-1 probability at its feature point.

    Returns
    -------
    (LabeledDataset, callable)
        The dataset (num_classes=2) and an oracle mapping points to their
        true per-class probability vectors, for bound-coverage checks.
    """
    n = int(n)
    if n < 1:
        raise ValueError(f"n must be positive, got {n}")
    lo, hi = _check_box(input_box)
    if lo.size != truth.d:
        raise ValueError(f"box dimension {lo.size} does not match w dimension {truth.d}")
    rng = np.random.default_rng(seed)
    features = rng.uniform(lo, hi, size=(n, truth.d))
    p1 = truth.prob_class1(features)
    labels = (rng.random(n) < p1).astype(np.int64)
    return LabeledDataset(features, labels, 2), truth.class_probs


def _place_centers(cfg, rng):
    lo, hi = cfg.box
    inner_lo = lo + cfg.radius
    inner_hi = hi - cfg.radius
    if not np.all(inner_hi >= inner_lo):
        raise ValueError(
            f"box too small for clusters of radius {cfg.radius}"
        )
    min_sep = cfg.gamma + 2.0 * cfg.radius
    for _ in range(50):
        centers = []
        for _ in range(cfg.num_classes):
            for _ in range(200):
                cand = rng.uniform(inner_lo, inner_hi)
                if all(np.linalg.norm(cand - c) >= min_sep for c in centers):
                    centers.append(cand)
                    break
            else:
                break
        if len(centers) == cfg.num_classes:
            return np.asarray(centers)
    raise ValueError(
        f"infeasible packing: cannot place {cfg.num_classes} centers with "
        f"pairwise spacing {min_sep} inside the box after bounded retries"
    )


def _sample_ball(rng, center, radius, count):
    d = center.size
    direction = rng.normal(size=(count, d))
    norms = np.linalg.norm(direction, axis=1, keepdims=True)
    norms[norms == 0] = 1.0
    radii = radius * rng.random(count) ** (1.0 / d)
    return center + direction / norms * radii[:, None]


def generate_margin(cfg, seed):
    """Sample a margin-separated dataset of uniform balls around spaced centers.

    Every pair of samples from different classes ends up at distance
    >= ``cfg.gamma``; this is re-verified exhaustively on the generated
    points and generation is retried if it ever fails.

    Raises
    ------
    ValueError
        Infeasible packing: the centers cannot be placed at the required
        spacing inside the box after bounded retries.
    """
    rng = np.random.default_rng(seed)
    for _ in range(10):
        centers = _place_centers(cfg, rng)
        parts = [
            _sample_ball(rng, centers[c], cfg.radius, cfg.points_per_class)
            for c in range(cfg.num_classes)
        ]
        features = np.vstack(parts)
        labels = np.repeat(np.arange(cfg.num_classes, dtype=np.int64),
                           cfg.points_per_class)
        if cfg.num_classes == 1 or _min_interclass_distance(features, labels) >= cfg.gamma:
            return LabeledDataset(features, labels, cfg.num_classes)
    raise ValueError("margin violated repeatedly; check gamma/radius/box consistency")


def _min_interclass_distance(features, labels):
    best = math.inf
    classes = np.unique(labels)
    for i, a in enumerate(classes):
        pa = features[labels == a]
        for b in classes[i + 1:]:
            pb = features[labels == b]
            diff = pa[:, None, :] - pb[None, :, :]
            dist = np.sqrt((diff * diff).sum(axis=2))
            best = min(best, float(dist.min()))
    return best


def max_gradient_check(truth, samples):
    """Max empirical slope |p(y) - p(y')| / ||y - y'|| over all sample pairs.

    Coincident pairs are excluded. The result can never exceed k / 4.
    """
    Y = as_feature_matrix(samples, name="samples")
    p = truth.prob_class1(Y)
    diff = Y[:, None, :] - Y[None, :, :]
    dist = np.sqrt((diff * diff).sum(axis=2))
    dp = np.abs(p[:, None] - p[None, :])
    mask = dist > 0
    if not mask.any():
        return 0.0
    return float((dp[mask] / dist[mask]).max())
