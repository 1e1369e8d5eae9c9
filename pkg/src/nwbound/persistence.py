"""Model serialization to a single npz archive.

The archive stores hyperparameters plus whatever data the variant needs
to rebuild its fitted state deterministically: the kernel estimators
refit from the stored training arrays (the k-d tree build is
deterministic, so the localized variant reloads to an identical tree),
while the grid classifier stores its cells directly and never needs the
training points back. No pickling is involved.
"""

import numpy as np

from .dyadic import DyadicGridClassifier
from .estimators import LocalizedNWClassifier, RegularNWClassifier

__all__ = ["save_model", "load_model"]

_FORMAT = "nwbound-model-v1"


def _require_fitted(model, attr):
    if not hasattr(model, attr):
        raise ValueError(f"cannot save an unfitted {type(model).__name__}")


def _normalize(path):
    # numpy appends .npz on save; mirror that so save and load agree
    path = str(path)
    return path if path.endswith(".npz") else path + ".npz"


def save_model(model, path):
    """Write a fitted classifier to ``path`` as an npz archive.

    Returns the path actually written, which gains an ``.npz`` suffix
    when ``path`` lacks one.
    """
    path = _normalize(path)
    if isinstance(model, RegularNWClassifier):
        _require_fitted(model, "X_")
        np.savez_compressed(
            path,
            format=_FORMAT,
            variant="regular",
            kernel=model.kernel_spec_.family,
            bandwidth=np.float64(model.kernel_spec_.bandwidth),
            truncate=np.uint8(model.kernel_spec_.truncate),
            n_classes=np.int64(model.n_classes_),
            X=model.X_,
            y=model.y_,
        )
    elif isinstance(model, LocalizedNWClassifier):
        _require_fitted(model, "X_")
        np.savez_compressed(
            path,
            format=_FORMAT,
            variant="localized",
            kernel=model.kernel_spec_.family,
            bandwidth=np.float64(model.kernel_spec_.bandwidth),
            truncate=np.uint8(model.kernel_spec_.truncate),
            n_classes=np.int64(model.n_classes_),
            n_neighbors=np.int64(model.n_neighbors_),
            leaf_size=np.int64(model.leaf_size),
            X=model.X_,
            y=model.y_,
        )
    elif isinstance(model, DyadicGridClassifier):
        _require_fitted(model, "cells_")
        np.savez_compressed(
            path,
            format=_FORMAT,
            variant="dyadic",
            resolution=np.int64(model.resolution_),
            tolerance=np.float64(model.out_of_box_tolerance),
            n_classes=np.int64(model.n_classes_),
            n_features=np.int64(model.n_features_in_),
            box_min=model.box_min_,
            box_max=model.box_max_,
            cells=np.asarray(model._cell_keys_, dtype=np.int64).reshape(
                len(model._cell_keys_), model.n_features_in_),
            counts=model._cell_counts_,
        )
    else:
        raise TypeError(f"cannot save a {type(model).__name__}")
    return path


def load_model(path):
    """Rebuild a classifier saved by :func:`save_model`."""
    with np.load(_normalize(path), allow_pickle=False) as archive:
        if "format" not in archive or str(archive["format"]) != _FORMAT:
            raise ValueError(f"{path} is not a {_FORMAT} archive")
        variant = str(archive["variant"])
        if variant == "regular":
            model = RegularNWClassifier(
                kernel=str(archive["kernel"]),
                bandwidth=float(archive["bandwidth"]),
                truncate=bool(archive["truncate"]),
                n_classes=int(archive["n_classes"]),
            )
            return model.fit(archive["X"], archive["y"])
        if variant == "localized":
            model = LocalizedNWClassifier(
                kernel=str(archive["kernel"]),
                bandwidth=float(archive["bandwidth"]),
                truncate=bool(archive["truncate"]),
                n_neighbors=int(archive["n_neighbors"]),
                leaf_size=int(archive["leaf_size"]),
                n_classes=int(archive["n_classes"]),
            )
            return model.fit(archive["X"], archive["y"])
        if variant == "dyadic":
            model = DyadicGridClassifier(
                resolution=int(archive["resolution"]),
                out_of_box_tolerance=float(archive["tolerance"]),
                n_classes=int(archive["n_classes"]),
            )
            m = int(archive["resolution"])
            model.resolution_ = m
            model.n_classes_ = int(archive["n_classes"])
            model.classes_ = np.arange(model.n_classes_)
            model.n_features_in_ = int(archive["n_features"])
            model.box_min_ = archive["box_min"].copy()
            model.box_max_ = archive["box_max"].copy()
            model.cell_width_ = (model.box_max_ - model.box_min_) / float(2 ** m)
            cells = archive["cells"]
            counts = archive["counts"].copy()
            model._cell_keys_ = [tuple(int(v) for v in row) for row in cells]
            model._cell_counts_ = counts
            model.cells_ = dict(zip(model._cell_keys_, counts))
            return model
        raise ValueError(f"unknown variant {variant!r} in {path}")
