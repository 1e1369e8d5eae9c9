"""Data-driven parameter selection: Lipschitz estimation, regime
detection, and bandwidth search.

The Lipschitz estimate divides a threshold probability by the closest
same-label pair distance. Regime detection compares the largest
within-class pairwise distance against the largest overall distance on a
stratified subsample. Bandwidth search maximizes a weighted trade-off
between validation accuracy and mean bound width with a deterministic
multi-start golden-section search on log bandwidth.
"""

import math
from dataclasses import dataclass

import numpy as np
from sklearn.base import clone

from .bounds import total_bound
from .data import stratified_sample
from .kdtree import KdTree

__all__ = [
    "RegimeReport",
    "BandwidthSearchResult",
    "estimate_lipschitz",
    "detect_regime",
    "optimize_bandwidth",
]

# cells (block rows x points x dims) per pairwise-distance block
_PAIR_CHUNK = 4_000_000


@dataclass(frozen=True)
class RegimeReport:
    """Verdict and evidence from pairwise-distance regime detection.

    ``estimated_margin`` is the smallest between-class distance in the
    sample and is present exactly when the verdict is separable.
    """

    regime: str
    max_intra_class_distance: float
    max_global_distance: float
    estimated_margin: float | None
    sample_size: int
    note: str | None = None

    def __post_init__(self):
        if self.regime not in ("overlapping", "separable"):
            raise ValueError(f"unknown regime {self.regime!r}")
        if self.max_intra_class_distance < 0 or self.max_global_distance < 0:
            raise ValueError("distances must be non-negative")
        if (self.estimated_margin is not None) != (self.regime == "separable"):
            raise ValueError("estimated_margin is set iff regime is separable")


@dataclass(frozen=True)
class BandwidthSearchResult:
    """Outcome of the bandwidth search.

    ``trace`` lists every evaluated bandwidth as (bandwidth, accuracy,
    mean_bound, score) in evaluation order; each row satisfies
    score = weight * accuracy - (1 - weight) * mean_bound.
    """

    bandwidth: float
    score: float
    accuracy: float
    mean_bound: float
    weight: float
    trace: tuple


def _same_label_extremes(X, labels):
    """Min nonzero / max distance over same-label pairs.

    Returns (min_nonzero, max_dist, zero_pair) where zero_pair is a
    global index pair at distance zero, or None. max_dist is -inf when
    no same-label pair exists at all.
    """
    min_nz = np.inf
    max_d = -np.inf
    zero_pair = None
    d_feat = X.shape[1]
    for c in np.unique(labels):
        idx = np.flatnonzero(labels == c)
        if idx.size < 2:
            continue
        pts = X[idx]
        m = idx.size
        step = max(1, _PAIR_CHUNK // max(1, m * d_feat))
        cols = np.arange(m)
        for lo in range(0, m - 1, step):
            hi = min(lo + step, m - 1)
            diff = pts[lo:hi, None, :] - pts[None, :, :]
            dist = np.sqrt((diff * diff).sum(axis=2))
            upper = cols[None, :] > np.arange(lo, hi)[:, None]
            vals = dist[upper]
            if vals.size == 0:
                continue
            max_d = max(max_d, float(vals.max()))
            nz = vals[vals > 0]
            if nz.size:
                min_nz = min(min_nz, float(nz.min()))
            if zero_pair is None and nz.size < vals.size:
                i, j = np.argwhere(upper & (dist == 0))[0]
                zero_pair = (int(idx[lo + i]), int(idx[j]))
    return min_nz, max_d, zero_pair


def estimate_lipschitz(ds, p_t=0.1, subsample_size=None, seed=0, use_sup=False):
    """Lipschitz-constant estimate from closest same-label points.

    Divides the threshold probability ``p_t`` by the smallest nonzero
    distance between two samples sharing a label. With ``use_sup`` the
    denominator is the largest same-label distance instead, which gives
    a much smaller (sup-based) constant; the closest-pair reading is the
    default because it bounds the steepest observable probability change.

    Parameters
    ----------
    ds : LabeledDataset
    p_t : float in (0, 1]
        Threshold probability in the numerator.
    subsample_size : int, optional
        Estimate on a stratified subsample of this size instead of the
        full dataset.
    seed : int
        Subsampling seed; unused without ``subsample_size``.
    use_sup : bool
        Use the largest same-label distance as the denominator.

    Raises
    ------
    ValueError
        If no two samples share a label, or every same-label pair is
        coincident (the error names one duplicate pair).
    """
    p_t = float(p_t)
    if not 0.0 < p_t <= 1.0:
        raise ValueError(f"p_t must lie in (0, 1], got {p_t}")
    if subsample_size is not None:
        ds = stratified_sample(ds, min(int(subsample_size), ds.n), seed)
    min_nz, max_d, zero_pair = _same_label_extremes(ds.features, ds.labels)
    if max_d == -np.inf:
        raise ValueError("need at least two samples sharing a label")
    if use_sup:
        if max_d == 0.0:
            raise ValueError(
                f"all same-label pairs are coincident; rows {zero_pair[0]} and "
                f"{zero_pair[1]} share a label and a feature vector")
        return p_t / max_d
    if not np.isfinite(min_nz):
        raise ValueError(
            f"all same-label pairs are coincident; rows {zero_pair[0]} and "
            f"{zero_pair[1]} share a label and a feature vector")
    return p_t / min_nz


def _representative_sample(ds, size, seed):
    """Stratified subsample whose draw ignores label numbering.

    Classes are processed in order of first occurrence, so relabeling
    the classes leaves the selected rows unchanged.
    """
    if size >= ds.n:
        return ds
    values, first = np.unique(ds.labels, return_index=True)
    order = np.argsort(first)
    values = values[order]
    counts = np.array([int((ds.labels == v).sum()) for v in values])
    exact = size * counts / counts.sum()
    take = np.floor(exact).astype(np.int64)
    short = size - int(take.sum())
    if short > 0:
        rank = np.lexsort((np.arange(len(values)), -(exact - take)))
        take[rank[:short]] += 1
    take = np.minimum(take, counts)
    short = size - int(take.sum())
    while short > 0:
        room = np.flatnonzero(take < counts)
        take[room[:short]] += 1
        short = size - int(take.sum())
    rng = np.random.default_rng(seed)
    picked = []
    for v, k in zip(values, take):
        members = np.flatnonzero(ds.labels == v)
        perm = rng.permutation(members)
        picked.append(perm[: int(k)])
    return ds.subset(np.sort(np.concatenate(picked)))


def detect_regime(ds, sample_size=1000, seed=0, ratio_threshold=0.5):
    """Classify the dataset as overlapping or separable.

    Computes all pairwise distances on a stratified subsample and calls
    the data separable when the largest within-class distance is below
    ``ratio_threshold`` times the largest overall distance. A separable
    verdict comes with the smallest between-class distance in the sample
    as the estimated margin. Deterministic given the seed, and invariant
    to renaming the class labels.
    """
    sample_size = int(sample_size)
    if sample_size < 2:
        raise ValueError(f"sample_size must be at least 2, got {sample_size}")
    if not 0.0 < float(ratio_threshold) <= 1.0:
        raise ValueError(
            f"ratio_threshold must lie in (0, 1], got {ratio_threshold}")
    if ds.n < 2:
        raise ValueError("need at least two samples to compare distances")
    sample = _representative_sample(ds, sample_size, seed)
    X, y = sample.features, sample.labels
    m = X.shape[0]
    max_global = 0.0
    max_intra = 0.0
    min_inter = np.inf
    cols = np.arange(m)
    step = max(1, _PAIR_CHUNK // max(1, m * X.shape[1]))
    for lo in range(0, m - 1, step):
        hi = min(lo + step, m - 1)
        diff = X[lo:hi, None, :] - X[None, :, :]
        dist = np.sqrt((diff * diff).sum(axis=2))
        upper = cols[None, :] > np.arange(lo, hi)[:, None]
        same = y[None, :] == y[lo:hi, None]
        if np.any(upper):
            max_global = max(max_global, float(dist[upper].max()))
        intra = upper & same
        if np.any(intra):
            max_intra = max(max_intra, float(dist[intra].max()))
        inter = upper & ~same
        if np.any(inter):
            min_inter = min(min_inter, float(dist[inter].min()))
    if np.unique(y).size < 2:
        return RegimeReport(
            regime="overlapping",
            max_intra_class_distance=max_intra,
            max_global_distance=max_global,
            estimated_margin=None,
            sample_size=m,
            note="single-class sample; overlapping by definition",
        )
    separable = max_intra < float(ratio_threshold) * max_global
    return RegimeReport(
        regime="separable" if separable else "overlapping",
        max_intra_class_distance=max_intra,
        max_global_distance=max_global,
        estimated_margin=float(min_inter) if separable else None,
        sample_size=m,
    )


_INVPHI = (math.sqrt(5.0) - 1.0) / 2.0


def optimize_bandwidth(estimator, train, val, cfg, bandwidth_range,
                       weight=0.95, budget=30):
    """Pick the bandwidth maximizing weight * accuracy - (1 - weight) * bound.

    Runs a golden-section search on log bandwidth inside each third of
    the range (three restarts guard against the objective's plateaus),
    sharing one memoized evaluation cache. Each evaluation clones the
    estimator prototype, sets its bandwidth, fits on ``train``, and
    scores accuracy (abstentions incorrect) and mean total bound
    (abstentions contribute 1) on ``val``.

    Parameters
    ----------
    estimator : RegularNWClassifier or LocalizedNWClassifier
        Prototype; its ``bandwidth`` parameter is overwritten per trial.
    train, val : LabeledDataset
    cfg : BoundConfig
    bandwidth_range : (float, float)
        Inclusive positive search range.
    weight : float in [0, 1]
        Accuracy weight r in the objective.
    budget : int >= 3
        Number of bandwidth evaluations (cache hits are counted, so the
        search always terminates after exactly ``budget`` requests).

    Raises
    ------
    ValueError
        If every evaluated bandwidth abstains on all validation queries;
        the message reports the smallest validation nearest-neighbor
        distance as a usable lower bound for the range.
    """
    lo, hi = (float(b) for b in bandwidth_range)
    if not (np.isfinite(lo) and np.isfinite(hi)) or lo <= 0 or hi < lo:
        raise ValueError(
            f"bandwidth_range must satisfy 0 < low <= high, got {bandwidth_range}")
    weight = float(weight)
    if not 0.0 <= weight <= 1.0:
        raise ValueError(f"weight must lie in [0, 1], got {weight}")
    budget = int(budget)
    if budget < 3:
        raise ValueError(f"budget must be at least 3, got {budget}")

    cache = {}
    trace = []
    abstain_counts = []

    def evaluate(log_lam):
        lam = math.exp(log_lam)
        if lam in cache:
            return cache[lam]
        model = clone(estimator).set_params(bandwidth=lam)
        model.fit(train.features, train.labels)
        estimates = model.estimate_batch(val.features)
        correct = 0
        abstained = 0
        bound_sum = 0.0
        for est, label in zip(estimates, val.labels):
            bound_sum += total_bound(est, cfg, model.kernel_spec_).total
            if est.abstained:
                abstained += 1
            elif est.predicted_class == int(label):
                correct += 1
        acc = correct / val.n
        mean_bound = bound_sum / val.n
        score = weight * acc - (1.0 - weight) * mean_bound
        cache[lam] = score
        trace.append((lam, acc, mean_bound, score))
        abstain_counts.append(abstained)
        return score

    def golden(a, b, share):
        if share <= 0:
            return
        if share == 1 or b - a < 1e-12:
            evaluate((a + b) / 2.0)
            return
        c = b - _INVPHI * (b - a)
        d = a + _INVPHI * (b - a)
        fc = evaluate(c)
        fd = evaluate(d)
        for _ in range(share - 2):
            if fc >= fd:
                b, d, fd = d, c, fc
                c = b - _INVPHI * (b - a)
                fc = evaluate(c)
            else:
                a, c, fc = c, d, fd
                d = a + _INVPHI * (b - a)
                fd = evaluate(d)

    log_lo, log_hi = math.log(lo), math.log(hi)
    edges = np.linspace(log_lo, log_hi, 4)
    shares = [budget // 3] * 3
    for i in range(budget % 3):
        shares[i] += 1
    for (a, b), share in zip(zip(edges[:-1], edges[1:]), shares):
        golden(float(a), float(b), share)

    if all(count == val.n for count in abstain_counts):
        tree = KdTree(train.features)
        nn = min(tree.query(q, 1)[1][0] for q in val.features)
        raise ValueError(
            "every evaluated bandwidth abstained on all validation queries; "
            f"smallest validation nearest-neighbor distance is {nn:.6g}, "
            "raise the bandwidth range above it")

    best = max(range(len(trace)), key=lambda i: trace[i][3])
    lam, acc, mean_bound, score = trace[best]
    return BandwidthSearchResult(
        bandwidth=lam,
        score=score,
        accuracy=acc,
        mean_bound=mean_bound,
        weight=weight,
        trace=tuple(trace),
    )
