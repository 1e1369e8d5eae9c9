"""Evaluation metrics and runtime benchmarks.

Accuracy counts abstentions as incorrect; the confusion matrix covers
only queries that produced a class. Type I marks a wrong or abstained
prediction, Type II a bound wide enough that the predicted class
probability could fall below the threshold. The ranking-based recall
curve and the scaling benchmark emit plain arrays ready for CSV export.
"""

import time
from dataclasses import dataclass

import numpy as np

__all__ = [
    "MetricsReport",
    "CumulativeRecallCurve",
    "BenchmarkRow",
    "BenchmarkResult",
    "confusion_matrix",
    "evaluate",
    "expected_calibration_error",
    "cumulative_recall",
    "scaling_benchmark",
]


@dataclass(frozen=True)
class MetricsReport:
    """Scalar metrics plus per-class vectors and the confusion matrix.

    ``confusion[i, j]`` counts true class i predicted as j over queries
    that produced a class; its entries sum to n_queries - abstentions.
    Accuracy, the weighted averages, and the error counts all use
    n_queries as the denominator base.
    """

    accuracy: float
    weighted_precision: float
    weighted_recall: float
    precision: np.ndarray
    recall: np.ndarray
    confusion: np.ndarray
    abstentions: int
    type1: int
    type2: int
    ece: float
    mean_bound: float
    n_queries: int


@dataclass(frozen=True)
class CumulativeRecallCurve:
    """Errors captured when flagging the most uncertain fraction.

    ``degenerate`` marks the all-zero curve returned when there are no
    errors to capture.
    """

    fraction_flagged: np.ndarray
    errors_captured: np.ndarray
    degenerate: bool


def _predicted_labels(estimates):
    return np.asarray([e.predicted_class for e in estimates], dtype=np.int64)


def confusion_matrix(predicted, labels, num_classes):
    """C x C counts, true class by row, over non-abstained predictions."""
    predicted = np.asarray(predicted, dtype=np.int64)
    labels = np.asarray(labels, dtype=np.int64)
    if predicted.shape != labels.shape:
        raise ValueError(
            f"length mismatch: {predicted.shape[0]} predictions vs "
            f"{labels.shape[0]} labels")
    keep = predicted >= 0
    flat = labels[keep] * num_classes + predicted[keep]
    counts = np.bincount(flat, minlength=num_classes * num_classes)
    return counts.reshape(num_classes, num_classes)


def evaluate(estimates, breakdowns, labels, prob_threshold=0.5):
    """Full metrics over aligned estimates, bound breakdowns, and labels.

    Type I counts queries whose prediction is wrong or abstained.
    Type II counts queries where confidence minus the total bound falls
    below ``prob_threshold``: the bound cannot rule out a sub-threshold
    class probability. Abstentions satisfy both. Weighted averages use
    class support over all queries, which makes weighted recall equal
    accuracy exactly.
    """
    labels = np.asarray(labels, dtype=np.int64)
    n = labels.shape[0]
    if len(estimates) != n or len(breakdowns) != n:
        raise ValueError(
            f"length mismatch: {len(estimates)} estimates, "
            f"{len(breakdowns)} breakdowns, {n} labels")
    if n == 0:
        raise ValueError("need at least one prediction")
    num_classes = estimates[0].probs.shape[0]
    predicted = _predicted_labels(estimates)
    confusion = confusion_matrix(predicted, labels, num_classes)
    abstentions = int((predicted < 0).sum())
    correct = int(np.trace(confusion))
    accuracy = correct / n
    support = np.bincount(labels, minlength=num_classes).astype(np.float64)
    diag = np.diag(confusion).astype(np.float64)
    pred_count = confusion.sum(axis=0).astype(np.float64)
    with np.errstate(invalid="ignore", divide="ignore"):
        precision = np.where(pred_count > 0, diag / pred_count, 0.0)
        recall = np.where(support > 0, diag / support, 0.0)
    weighted_precision = float((support / n) @ precision)
    weighted_recall = float((support / n) @ recall)
    totals = np.asarray([b.total for b in breakdowns], dtype=np.float64)
    confidences = np.asarray([e.confidence for e in estimates])
    type1 = n - correct
    type2 = int((confidences - totals < float(prob_threshold)).sum())
    ece = expected_calibration_error(estimates, labels)
    return MetricsReport(
        accuracy=accuracy,
        weighted_precision=weighted_precision,
        weighted_recall=weighted_recall,
        precision=precision,
        recall=recall,
        confusion=confusion,
        abstentions=abstentions,
        type1=type1,
        type2=int(type2),
        ece=ece,
        mean_bound=float(totals.mean()),
        n_queries=n,
    )


def expected_calibration_error(estimates, labels, bins=10):
    """Binned gap between confidence and accuracy.

    Confidence is the top class probability; predictions land in
    equal-width bins over [0, 1] and the result is the support-weighted
    mean absolute gap between each bin's accuracy and mean confidence.
    Abstentions carry uniform confidence and count as incorrect.
    """
    labels = np.asarray(labels, dtype=np.int64)
    if len(estimates) != labels.shape[0]:
        raise ValueError(
            f"length mismatch: {len(estimates)} estimates vs "
            f"{labels.shape[0]} labels")
    if len(estimates) == 0:
        raise ValueError("need at least one prediction")
    bins = int(bins)
    if bins < 1:
        raise ValueError(f"bins must be positive, got {bins}")
    conf = np.asarray([e.confidence for e in estimates])
    correct = _predicted_labels(estimates) == labels
    idx = np.minimum((conf * bins).astype(np.int64), bins - 1)
    n = conf.shape[0]
    ece = 0.0
    for b in range(bins):
        members = idx == b
        count = int(members.sum())
        if count == 0:
            continue
        gap = abs(correct[members].mean() - conf[members].mean())
        ece += (count / n) * gap
    return float(ece)


def cumulative_recall(estimates, breakdowns, labels, ranking="bound_width"):
    """Errors captured as a function of the flagged fraction.

    Queries are sorted by descending uncertainty (total bound width, or
    one minus the top class probability), ties by query index; the curve
    gives, for each prefix, the share of all misclassifications inside
    it. With no errors the curve is flat zero and marked degenerate.
    """
    labels = np.asarray(labels, dtype=np.int64)
    n = labels.shape[0]
    if len(estimates) != n or len(breakdowns) != n:
        raise ValueError(
            f"length mismatch: {len(estimates)} estimates, "
            f"{len(breakdowns)} breakdowns, {n} labels")
    if n == 0:
        raise ValueError("need at least one prediction")
    if ranking == "bound_width":
        key = np.asarray([b.total for b in breakdowns], dtype=np.float64)
    elif ranking == "one_minus_confidence":
        key = 1.0 - np.asarray([e.confidence for e in estimates])
    else:
        raise ValueError(
            f"unknown ranking {ranking!r}; "
            "choose 'bound_width' or 'one_minus_confidence'")
    errors = _predicted_labels(estimates) != labels
    total_errors = int(errors.sum())
    fraction = np.arange(1, n + 1) / n
    if total_errors == 0:
        return CumulativeRecallCurve(fraction, np.zeros(n), degenerate=True)
    order = np.lexsort((np.arange(n), -key))
    captured = np.cumsum(errors[order]) / total_errors
    return CumulativeRecallCurve(fraction, captured, degenerate=False)


@dataclass(frozen=True)
class BenchmarkRow:
    """Timings at one training size; times are seconds, medians over
    repeats, and sigma is the standard deviation of per-query time."""

    n: int
    fit_time: float
    query_time: float
    sigma: float


@dataclass(frozen=True)
class BenchmarkResult:
    rows: tuple
    query_time_slope: float
    fit_time_slope: float


def _loglog_slope(xs, ys):
    # clock underflow to exactly zero would break the log; floor it
    ys = np.maximum(np.asarray(ys, dtype=np.float64), 1e-9)
    lx = np.log(np.asarray(xs, dtype=np.float64))
    ly = np.log(ys)
    lx = lx - lx.mean()
    return float((lx @ (ly - ly.mean())) / (lx @ lx))


def scaling_benchmark(make_model, n_grid, d, n_queries, repeats=3, seed=0):
    """Fit and per-query wall-clock times across training sizes.

    Training features are uniform in the unit cube with two balanced
    classes; each size reuses a prefix of the same draw so growth is the
    only variable. Every cell runs ``repeats`` timed rounds after one
    discarded warm-up round and reports medians. Query time is the batch
    prediction time divided by the query count. Slopes are least-squares
    fits on the log-log points.
    """
    n_grid = [int(n) for n in n_grid]
    if len(n_grid) < 2 or any(b <= a for a, b in zip(n_grid, n_grid[1:])):
        raise ValueError(f"n_grid must be increasing with >= 2 sizes, got {n_grid}")
    if int(repeats) < 3:
        raise ValueError(f"repeats must be at least 3, got {repeats}")
    repeats = int(repeats)
    n_queries = int(n_queries)
    if n_queries < 1:
        raise ValueError(f"n_queries must be positive, got {n_queries}")
    rng = np.random.default_rng(seed)
    X = rng.uniform(0.0, 1.0, size=(max(n_grid), int(d)))
    y = rng.integers(0, 2, size=max(n_grid)).astype(np.int64)
    Q = rng.uniform(0.0, 1.0, size=(n_queries, int(d)))
    rows = []
    for n in n_grid:
        fit_times = []
        query_times = []
        for r in range(repeats + 1):
            model = make_model()
            t0 = time.perf_counter()
            model.fit(X[:n], y[:n])
            t1 = time.perf_counter()
            model.predict(Q)
            t2 = time.perf_counter()
            if r == 0:
                continue
            fit_times.append(t1 - t0)
            query_times.append((t2 - t1) / n_queries)
        rows.append(BenchmarkRow(
            n=n,
            fit_time=float(np.median(fit_times)),
            query_time=float(np.median(query_times)),
            sigma=float(np.std(query_times)),
        ))
    return BenchmarkResult(
        rows=tuple(rows),
        query_time_slope=_loglog_slope([r.n for r in rows],
                                       [r.query_time for r in rows]),
        fit_time_slope=_loglog_slope([r.n for r in rows],
                                     [r.fit_time for r in rows]),
    )
