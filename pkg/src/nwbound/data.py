"""Labeled dataset container, CSV ingestion, splits, and sampling."""

import csv
from dataclasses import dataclass

import numpy as np

from .validation import as_feature_matrix, as_label_vector

__all__ = [
    "DatasetError",
    "LabeledDataset",
    "load_csv",
    "load_features_csv",
    "write_csv",
    "train_test_split",
    "stratified_sample",
    "minmax_scale",
]


class DatasetError(ValueError):
    """Raised for malformed input data (as opposed to bad configuration)."""


@dataclass(frozen=True)
class LabeledDataset:
    """Immutable labeled dataset: (n, d) float features with int class labels.

    Parameters
    ----------
    features : array_like, shape (n, d)
        Finite feature values; n >= 1.
    labels : array_like, shape (n,)
        Class indices in [0, num_classes). Floats are accepted when they
        are exact integers.
    num_classes : int
        Number of classes C; every label must be < C.
    """

    features: np.ndarray
    labels: np.ndarray
    num_classes: int

    def __post_init__(self):
        feats = as_feature_matrix(self.features, name="features")
        labs = as_label_vector(self.labels, feats.shape[0], name="labels")
        c = int(self.num_classes)
        if c < 1:
            raise ValueError(f"num_classes must be positive, got {self.num_classes}")
        if labs.max() >= c:
            raise ValueError(
                f"label {labs.max()} out of range for num_classes={c}"
            )
        feats.setflags(write=False)
        labs.setflags(write=False)
        object.__setattr__(self, "features", feats)
        object.__setattr__(self, "labels", labs)
        object.__setattr__(self, "num_classes", c)

    @property
    def n(self):
        return self.features.shape[0]

    @property
    def d(self):
        return self.features.shape[1]

    def class_counts(self):
        """Per-class sample counts, length num_classes."""
        return np.bincount(self.labels, minlength=self.num_classes)

    def subset(self, indices):
        """Dataset restricted to the given row indices (order preserved)."""
        idx = np.asarray(indices, dtype=np.int64)
        return LabeledDataset(self.features[idx], self.labels[idx], self.num_classes)


def _parse_label(text, row_number):
    try:
        value = float(text)
    except ValueError:
        raise DatasetError(f"row {row_number}: label {text!r} is not numeric") from None
    if not np.isfinite(value) or value != int(value):
        raise DatasetError(
            f"row {row_number}: label {text!r} does not round-trip to an integer"
        )
    if value < 0:
        raise DatasetError(f"row {row_number}: label {text!r} is negative")
    return int(value)


def load_csv(path, label_column="last", feature_truncation=None, has_header=False,
             num_classes=None):
    """Load a labeled dataset from a CSV file.

    Parameters
    ----------
    path : str or Path
    label_column : "last" or int
        Which column holds the class label.
    feature_truncation : int, optional
        Keep only the first this-many feature columns (label excluded).
        The canonical heartbeat layout is 187 feature columns plus a
        trailing label; truncating to 100 keeps the informative prefix.
    has_header : bool
        Skip the first line.
    num_classes : int, optional
        Override the inferred class count (max label + 1).

    Raises
    ------
    DatasetError
        Malformed row (reported with its 1-based row number), non-integral
        label, inconsistent column count, or an empty file.
    """
    if feature_truncation is not None and int(feature_truncation) < 1:
        raise ValueError(f"feature_truncation must be positive, got {feature_truncation}")
    rows = []
    labels = []
    expected_cols = None
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        for row_number, row in enumerate(reader, start=1):
            if has_header and row_number == 1:
                continue
            if not row or (len(row) == 1 and not row[0].strip()):
                continue
            if expected_cols is None:
                expected_cols = len(row)
                if expected_cols < 2:
                    raise DatasetError(
                        f"row {row_number}: need at least one feature and a label column"
                    )
                if label_column == "last":
                    label_idx = expected_cols - 1
                else:
                    label_idx = int(label_column)
                    if not 0 <= label_idx < expected_cols:
                        raise ValueError(
                            f"label_column {label_column} out of range for "
                            f"{expected_cols} columns"
                        )
            elif len(row) != expected_cols:
                raise DatasetError(
                    f"row {row_number}: expected {expected_cols} columns, got {len(row)}"
                )
            labels.append(_parse_label(row[label_idx], row_number))
            feats = row[:label_idx] + row[label_idx + 1:]
            try:
                rows.append([float(v) for v in feats])
            except ValueError:
                bad = next(v for v in feats if not _is_float(v))
                raise DatasetError(
                    f"row {row_number}: feature value {bad!r} is not numeric"
                ) from None
    if not rows:
        raise DatasetError(f"{path}: no data rows")
    features = np.asarray(rows, dtype=np.float64)
    if not np.all(np.isfinite(features)):
        raise DatasetError(f"{path}: non-finite feature values")
    if feature_truncation is not None:
        t = int(feature_truncation)
        if t > features.shape[1]:
            raise ValueError(
                f"feature_truncation={t} exceeds the {features.shape[1]} feature columns"
            )
        features = features[:, :t]
    label_arr = np.asarray(labels, dtype=np.int64)
    c = int(num_classes) if num_classes is not None else int(label_arr.max()) + 1
    return LabeledDataset(features, label_arr, c)


def _is_float(text):
    try:
        float(text)
        return True
    except ValueError:
        return False


def load_features_csv(path, feature_truncation=None, has_header=False):
    """Load an unlabeled query matrix from CSV; an empty file yields 0 rows."""
    rows = []
    expected_cols = None
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        for row_number, row in enumerate(reader, start=1):
            if has_header and row_number == 1:
                continue
            if not row or (len(row) == 1 and not row[0].strip()):
                continue
            if expected_cols is None:
                expected_cols = len(row)
            elif len(row) != expected_cols:
                raise DatasetError(
                    f"row {row_number}: expected {expected_cols} columns, got {len(row)}"
                )
            try:
                rows.append([float(v) for v in row])
            except ValueError:
                bad = next(v for v in row if not _is_float(v))
                raise DatasetError(
                    f"row {row_number}: feature value {bad!r} is not numeric"
                ) from None
    if not rows:
        return np.zeros((0, 0), dtype=np.float64)
    features = np.asarray(rows, dtype=np.float64)
    if not np.all(np.isfinite(features)):
        raise DatasetError(f"{path}: non-finite feature values")
    if feature_truncation is not None:
        t = int(feature_truncation)
        if t > features.shape[1]:
            raise ValueError(
                f"feature_truncation={t} exceeds the {features.shape[1]} feature columns"
            )
        features = features[:, :t]
    return features


def write_csv(ds, path):
    """Write a dataset as CSV, features first and the label last.

    Floats are written with shortest round-trip formatting, so
    ``load_csv(write_csv(ds))`` reproduces features bit-for-bit.
    """
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        for row, label in zip(ds.features, ds.labels):
            writer.writerow([repr(float(v)) for v in row] + [int(label)])


def _apportion(counts, size):
    """Largest-remainder allocation of `size` slots proportional to counts."""
    counts = np.asarray(counts, dtype=np.float64)
    total = counts.sum()
    exact = size * counts / total
    base = np.floor(exact).astype(np.int64)
    short = size - int(base.sum())
    if short > 0:
        remainders = exact - base
        # ties broken toward the lower class index
        order = np.lexsort((np.arange(len(counts)), -remainders))
        base[order[:short]] += 1
    return base


def train_test_split(ds, test_fraction, seed, stratified=True):
    """Split into disjoint (train, test) datasets.

    With ``stratified=True`` the per-class proportions of both partitions
    match the source within one sample per class. Deterministic given seed.

    Raises
    ------
    ValueError
        If the fraction yields an empty partition.
    """
    frac = float(test_fraction)
    if not 0.0 < frac < 1.0:
        raise ValueError(f"test_fraction must lie in (0, 1), got {test_fraction}")
    rng = np.random.default_rng(seed)
    n = ds.n
    if stratified:
        counts = ds.class_counts()
        present = np.flatnonzero(counts)
        target_test = int(round(frac * n))
        test_counts = np.zeros_like(counts)
        test_counts[present] = _apportion(counts[present], min(target_test, n))
        test_counts = np.minimum(test_counts, counts)
        test_idx = []
        train_idx = []
        for c in range(ds.num_classes):
            members = np.flatnonzero(ds.labels == c)
            if members.size == 0:
                continue
            perm = rng.permutation(members)
            k = int(test_counts[c])
            test_idx.append(perm[:k])
            train_idx.append(perm[k:])
        test_idx = np.sort(np.concatenate(test_idx))
        train_idx = np.sort(np.concatenate(train_idx))
    else:
        perm = rng.permutation(n)
        k = int(round(frac * n))
        test_idx = np.sort(perm[:k])
        train_idx = np.sort(perm[k:])
    if test_idx.size == 0 or train_idx.size == 0:
        raise ValueError(
            f"test_fraction={test_fraction} yields an empty partition for n={n}"
        )
    return ds.subset(train_idx), ds.subset(test_idx)


def stratified_sample(ds, size, seed):
    """Random subset of the given size with per-class proportions within +-1.

    Raises
    ------
    ValueError
        If size exceeds the dataset size or is not positive.
    """
    size = int(size)
    if size < 1:
        raise ValueError(f"size must be positive, got {size}")
    if size > ds.n:
        raise ValueError(f"size {size} exceeds dataset size {ds.n}")
    rng = np.random.default_rng(seed)
    counts = ds.class_counts()
    present = np.flatnonzero(counts)
    take = np.zeros_like(counts)
    take[present] = np.minimum(_apportion(counts[present], size), counts[present])
    # rounding interactions with the per-class cap can leave a shortfall
    short = size - int(take.sum())
    while short > 0:
        room = np.flatnonzero(take < counts)
        take[room[:short]] += 1
        short = size - int(take.sum())
    picked = []
    for c in range(ds.num_classes):
        members = np.flatnonzero(ds.labels == c)
        if members.size == 0 or take[c] == 0:
            continue
        perm = rng.permutation(members)
        picked.append(perm[: int(take[c])])
    idx = np.sort(np.concatenate(picked))
    return ds.subset(idx)


def minmax_scale(train, *others):
    """Scale features to [0, 1] per dimension using the first dataset's range.

    Degenerate dimensions (zero range in `train`) map to 0. Additional
    datasets are transformed with the ranges fitted on `train`. Returns a
    single dataset, or a tuple when `others` are given.
    """
    lo = train.features.min(axis=0)
    span = train.features.max(axis=0) - lo
    safe = np.where(span > 0, span, 1.0)

    def apply(ds):
        scaled = (ds.features - lo) / safe
        scaled[:, span == 0] = 0.0
        return LabeledDataset(scaled, ds.labels, ds.num_classes)

    out = (apply(train),) + tuple(apply(ds) for ds in others)
    return out if others else out[0]
