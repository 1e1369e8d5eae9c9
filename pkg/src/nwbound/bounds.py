"""High-probability error bounds for kernel-weighted class probabilities.

The total bound splits into a bias part, controlled by the bandwidth and a
smoothness (Lipschitz) or separation (margin) constant, and a sampling
part, controlled by the local kernel mass kappa through a concentration
term alpha. Both parts are per query; the total is capped at 1 because a
probability difference can never exceed it. An abstaining estimate gets
the vacuous total of 1.

For a non-truncated Gaussian kernel the compact-support bias argument no
longer applies; the tail-aware variant splits samples at a cutoff radius
and charges the far ones a penalty proportional to the data diameter.
"""

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "TailParams",
    "BoundConfig",
    "BoundBreakdown",
    "alpha_n",
    "sampling_bound",
    "bias_bound",
    "bias_bound_tail",
    "total_bound",
]


@dataclass(frozen=True)
class TailParams:
    """Tail handling for infinite-support kernels.

    ``cutoff`` is the radius separating near from far samples; ``diameter``
    is a finite bound on the distance from any query to any sample.
    """

    cutoff: float
    diameter: float

    def __post_init__(self):
        if not (math.isfinite(self.cutoff) and self.cutoff > 0):
            raise ValueError(f"cutoff must be positive, got {self.cutoff!r}")
        if not (math.isfinite(self.diameter) and self.diameter > 0):
            raise ValueError(f"diameter must be positive, got {self.diameter!r}")


@dataclass(frozen=True)
class BoundConfig:
    """Distribution regime and confidence parameters for the bounds.

    Exactly one of ``lipschitz`` (overlapping classes with smooth true
    probabilities) or ``margin`` (classes separated by a known distance)
    must be given; it determines the bias rate beta = L or 1/gamma.

    Parameters
    ----------
    lipschitz : float, optional
        Smoothness constant L > 0 of the true class probabilities.
    margin : float, optional
        Separation distance gamma > 0 between classes.
    delta : float, default 0.05
        Per-query failure probability, in (0, 1).
    sigma : float, default 0.25
        Sub-Gaussian scale of the label noise. Bounded label indicators
        satisfy sigma <= 1/4, hence the default; 0 gives the noiseless
        limit.
    tail : TailParams, optional
        Required with (and only with) a non-truncated kernel.
    """

    lipschitz: float = None
    margin: float = None
    delta: float = 0.05
    sigma: float = 0.25
    tail: TailParams = None

    def __post_init__(self):
        if (self.lipschitz is None) == (self.margin is None):
            raise ValueError("exactly one of lipschitz or margin must be set")
        if self.lipschitz is not None and not (
                math.isfinite(self.lipschitz) and self.lipschitz > 0):
            raise ValueError(f"lipschitz must be positive, got {self.lipschitz!r}")
        if self.margin is not None and not (
                math.isfinite(self.margin) and self.margin > 0):
            raise ValueError(f"margin must be positive, got {self.margin!r}")
        if not 0.0 < self.delta < 1.0:
            raise ValueError(f"delta must lie in (0, 1), got {self.delta!r}")
        if not (math.isfinite(self.sigma) and self.sigma >= 0):
            raise ValueError(f"sigma must be non-negative, got {self.sigma!r}")

    @property
    def regime(self):
        return "lipschitz" if self.lipschitz is not None else "margin"

    @property
    def beta(self):
        """Bias rate: L in the Lipschitz regime, 1/gamma in the margin regime."""
        if self.lipschitz is not None:
            return self.lipschitz
        return 1.0 / self.margin


@dataclass(frozen=True)
class BoundBreakdown:
    """Per-query bound components; total = min(1, bias + sampling).

    ``vacuous`` marks abstentions, where no estimate exists and the
    components are the trivial decomposition bias=1, sampling=0.
    ``tail_bias_statement`` carries the alternative distance-weighted
    tail reading alongside the default, only in tail mode.
    """

    bias: float
    sampling: float
    total: float
    alpha: float
    vacuous: bool = False
    tail_bias_statement: float = None

    def __post_init__(self):
        if min(self.bias, self.sampling, self.total, self.alpha) < 0:
            raise ValueError("bound components must be non-negative")
        if self.total != min(1.0, self.bias + self.sampling):
            raise ValueError("total must equal min(1, bias + sampling)")


def alpha_n(kappa, delta):
    """Concentration term of the sampling bound.

    sqrt(kappa * log(sqrt(1 + kappa) / delta)) for kappa > 1, and the
    kappa-free sqrt(log(sqrt(2) / delta)) for 0 < kappa <= 1; the two
    branches agree at kappa = 1.

    Raises
    ------
    ValueError
        kappa <= 0 (callers must route kappa = 0 to abstention).
    """
    if not 0.0 < delta < 1.0:
        raise ValueError(f"delta must lie in (0, 1), got {delta!r}")
    if kappa <= 0.0:
        raise ValueError(f"kappa must be positive, got {kappa!r}")
    if kappa > 1.0:
        return math.sqrt(kappa * math.log(math.sqrt(1.0 + kappa) / delta))
    return math.sqrt(math.log(math.sqrt(2.0) / delta))


def sampling_bound(kappa, cfg):
    """Sampling-error bound 2 * sigma * alpha_n(kappa, delta) / kappa."""
    return 2.0 * cfg.sigma * alpha_n(kappa, cfg.delta) / kappa


def bias_bound(cfg, kernel):
    """Bias bound for a compact (truncated) kernel: beta * bandwidth.

    Raises
    ------
    ValueError
        Non-truncated kernel; use :func:`bias_bound_tail` instead.
    """
    if not kernel.truncate:
        raise ValueError(
            "bias_bound requires a truncated kernel; non-truncated kernels "
            "need tail parameters, see bias_bound_tail")
    return cfg.beta * kernel.bandwidth


def bias_bound_tail(cfg, kernel, weights, distances, variant="proof"):
    """Bias bound for an infinite-support kernel via a near/far split.

    Returns ``beta * cutoff + beta * diameter * eps_t`` where, by default,
    ``eps_t`` is the normalized weight mass of samples beyond the cutoff.
    ``variant="statement"`` instead computes the distance-weighted mass
    sum(theta_i * distance_i) over the far samples; the two readings
    disagree and the default is the one the near/far derivation actually
    produces.

    Parameters
    ----------
    cfg : BoundConfig
        Must carry tail parameters.
    kernel : KernelSpec
    weights : array_like
        Normalized per-sample weights theta_i, summing to 1 within 1e-9.
    distances : array_like
        Per-sample query distances, non-negative.
    """
    if cfg.tail is None:
        raise ValueError("missing tail parameters (BoundConfig.tail)")
    if variant not in ("proof", "statement"):
        raise ValueError(f"variant must be 'proof' or 'statement', got {variant!r}")
    theta = np.asarray(weights, dtype=np.float64)
    dist = np.asarray(distances, dtype=np.float64)
    if theta.shape != dist.shape or theta.ndim != 1:
        raise ValueError("weights and distances must be equal-length vectors")
    if abs(float(theta.sum()) - 1.0) > 1e-9:
        raise ValueError(f"weights must sum to 1, got {theta.sum()!r}")
    if np.any(dist < 0):
        raise ValueError("distances must be non-negative")
    far = dist > cfg.tail.cutoff
    if variant == "proof":
        eps_t = float(theta[far].sum())
    else:
        eps_t = float((theta[far] * dist[far]).sum())
    return cfg.beta * cfg.tail.cutoff + cfg.beta * cfg.tail.diameter * eps_t


def total_bound(estimate, cfg, kernel):
    """Combined per-query bound breakdown for an estimate.

    The same total applies to every class entry of the estimate, since
    neither component depends on the class. Abstained estimates get the
    vacuous breakdown with total 1. Tail parameters must be present
    exactly when the kernel is non-truncated.
    """
    if kernel.truncate and cfg.tail is not None:
        raise ValueError("tail parameters given for a truncated kernel")
    if not kernel.truncate and cfg.tail is None:
        raise ValueError("non-truncated kernel requires tail parameters")
    if estimate.abstained:
        return BoundBreakdown(bias=1.0, sampling=0.0, total=1.0, alpha=0.0,
                              vacuous=True)
    if kernel.truncate:
        bias = bias_bound(cfg, kernel)
        statement = None
    else:
        if estimate.weights is None or estimate.distances is None:
            raise ValueError(
                "estimate lacks per-sample weights/distances needed in tail mode")
        bias = bias_bound_tail(cfg, kernel, estimate.weights, estimate.distances)
        statement = bias_bound_tail(cfg, kernel, estimate.weights,
                                    estimate.distances, variant="statement")
    sampling = sampling_bound(estimate.kappa, cfg)
    total = min(1.0, bias + sampling)
    return BoundBreakdown(bias=bias, sampling=sampling, total=total,
                          alpha=alpha_n(estimate.kappa, cfg.delta),
                          tail_bias_statement=statement)
