"""Kernel-weighted classification with per-query frequentist error bounds.

Three estimator variants share one probability contract: a full linear
scan, a k-d-tree localized scan, and a grid hash lookup (the last trades
away probabilities and bounds for constant-time queries). Around them:
kernel definitions, CSV dataset handling, synthetic generators with
known ground truth, bound arithmetic, calibration utilities, evaluation
metrics, and a command-line front end.
"""

from .bounds import (
    BoundBreakdown,
    BoundConfig,
    TailParams,
    alpha_n,
    bias_bound,
    bias_bound_tail,
    sampling_bound,
    total_bound,
)
from .calibration import (
    BandwidthSearchResult,
    RegimeReport,
    detect_regime,
    estimate_lipschitz,
    optimize_bandwidth,
)
from .data import (
    DatasetError,
    LabeledDataset,
    load_csv,
    load_features_csv,
    minmax_scale,
    stratified_sample,
    train_test_split,
    write_csv,
)
from .dyadic import DyadicGridClassifier
from .estimators import (
    ABSTAIN,
    LocalizedNWClassifier,
    ProbabilityEstimate,
    RegularNWClassifier,
)
from .evaluation import (
    BenchmarkResult,
    BenchmarkRow,
    CumulativeRecallCurve,
    MetricsReport,
    confusion_matrix,
    cumulative_recall,
    evaluate,
    expected_calibration_error,
    scaling_benchmark,
)
from .kdtree import KdTree
from .kernels import KERNEL_FAMILIES, KernelSpec, eval_base, eval_scaled
from .persistence import load_model, save_model
from .synthetic import (
    LogisticGroundTruth,
    MarginClusterConfig,
    generate_margin,
    generate_overlapping,
    max_gradient_check,
)

__version__ = "0.1.0"

__all__ = [
    "ABSTAIN",
    "BandwidthSearchResult",
    "BenchmarkResult",
    "BenchmarkRow",
    "BoundBreakdown",
    "BoundConfig",
    "CumulativeRecallCurve",
    "DatasetError",
    "DyadicGridClassifier",
    "KERNEL_FAMILIES",
    "KdTree",
    "KernelSpec",
    "LabeledDataset",
    "LocalizedNWClassifier",
    "LogisticGroundTruth",
    "MarginClusterConfig",
    "MetricsReport",
    "ProbabilityEstimate",
    "RegimeReport",
    "RegularNWClassifier",
    "TailParams",
    "alpha_n",
    "bias_bound",
    "bias_bound_tail",
    "confusion_matrix",
    "cumulative_recall",
    "detect_regime",
    "estimate_lipschitz",
    "eval_base",
    "eval_scaled",
    "evaluate",
    "expected_calibration_error",
    "generate_margin",
    "generate_overlapping",
    "load_csv",
    "load_features_csv",
    "load_model",
    "max_gradient_check",
    "minmax_scale",
    "optimize_bandwidth",
    "sampling_bound",
    "save_model",
    "scaling_benchmark",
    "stratified_sample",
    "total_bound",
    "train_test_split",
    "write_csv",
    "__version__",
]
