"""Kernel families and bandwidth-scaled kernel evaluation.

All kernels are radial: the raw form ``K(v)`` is evaluated at the scaled
distance ``v = distance / bandwidth``. Compact families vanish for
``|v| > 1``; the Gaussian decays but never reaches zero and is truncated
by default so that weights keep bounded support. Weights are normalized
by the family's peak value ``c_k`` so scaled weights always lie in [0, 1].
"""

import math
from dataclasses import dataclass, field

import numpy as np

__all__ = ["KERNEL_FAMILIES", "KernelSpec", "eval_base", "eval_scaled"]


def _boxcar(v):
    return np.where(v <= 1.0, 1.0, 0.0)


def _gaussian(v):
    return np.exp(-0.5 * v * v)


def _epanechnikov(v):
    return np.where(v <= 1.0, 1.0 - v * v, 0.0)


def _quartic(v):
    u = 1.0 - v * v
    return np.where(v <= 1.0, u * u, 0.0)


def _triweight(v):
    u = 1.0 - v * v
    return np.where(v <= 1.0, u * u * u, 0.0)


def _tricube(v):
    # support is open at |v| = 1, though the value there is 0 either way
    u = 1.0 - v * v * v
    return np.where(v < 1.0, u * u * u, 0.0)


def _cosine(v):
    return np.where(v <= 1.0, (math.pi / 4.0) * np.cos((math.pi / 2.0) * v), 0.0)


# family name -> (raw kernel on |v|, peak value sup_v K(v))
_FAMILIES = {
    "boxcar": (_boxcar, 1.0),
    "gaussian": (_gaussian, 1.0),
    "epanechnikov": (_epanechnikov, 1.0),
    "quartic": (_quartic, 1.0),
    "triweight": (_triweight, 1.0),
    "tricube": (_tricube, 1.0),
    "cosine": (_cosine, math.pi / 4.0),
}

KERNEL_FAMILIES = tuple(sorted(_FAMILIES))


def _lookup(family):
    try:
        return _FAMILIES[family.lower()]
    except (KeyError, AttributeError):
        raise ValueError(
            f"unknown kernel family {family!r}; choose from {', '.join(KERNEL_FAMILIES)}"
        ) from None


def eval_base(family, v):
    """Evaluate the raw kernel K(v) for one family.

    Parameters
    ----------
    family : str
        One of ``KERNEL_FAMILIES`` (case-insensitive).
    v : float or array_like
        Evaluation point(s); any real value is accepted.

    Returns
    -------
    float or ndarray
        K(v), symmetric in the sign of v, in ``[0, c_k]`` where ``c_k``
        is the family peak. Compact families return 0 outside [-1, 1].
    """
    func, _ = _lookup(family)
    arr = np.abs(np.asarray(v, dtype=np.float64))
    out = func(arr)
    if np.ndim(v) == 0:
        return float(out)
    return out


@dataclass(frozen=True)
class KernelSpec:
    """A kernel family bound to a bandwidth.

    Parameters
    ----------
    family : str
        Kernel family name, case-insensitive.
    bandwidth : float
        Positive length scale in feature-space distance units.
    truncate : bool, default True
        Force zero weight beyond one bandwidth. Only the Gaussian family
        may disable this, and doing so requires tail parameters when
        bias bounds are computed (see :mod:`nwbound.bounds`).

    Attributes
    ----------
    c_k : float
        Peak value of the raw kernel; pi/4 for the cosine family, 1
        otherwise. Dividing by it keeps scaled weights in [0, 1].
    """

    family: str
    bandwidth: float
    truncate: bool = True
    c_k: float = field(init=False)

    def __post_init__(self):
        func, peak = _lookup(self.family)
        object.__setattr__(self, "family", self.family.lower())
        bw = float(self.bandwidth)
        if not math.isfinite(bw) or bw <= 0.0:
            raise ValueError(f"bandwidth must be a positive finite real, got {self.bandwidth!r}")
        object.__setattr__(self, "bandwidth", bw)
        if not self.truncate and self.family != "gaussian":
            raise ValueError(
                "truncate=False is only meaningful for the gaussian family; "
                f"{self.family!r} already has compact support"
            )
        object.__setattr__(self, "c_k", peak)


def _scaled_weights(spec, distances):
    """Unchecked vectorized core of eval_scaled; distances must be >= 0."""
    func, peak = _FAMILIES[spec.family]
    v = distances / spec.bandwidth
    w = func(v)
    if peak != 1.0:
        w = w / peak
    if spec.truncate:
        w = np.where(v > 1.0, 0.0, w)
    return w


def eval_scaled(spec, distance):
    """Bandwidth-scaled weight ``(1/c_k) * K(distance / bandwidth)``.

    Parameters
    ----------
    spec : KernelSpec
    distance : float or array_like
        Non-negative distance(s).

    Returns
    -------
    float or ndarray
        Weight(s) in [0, 1]; exactly 0 for ``distance > bandwidth``
        whenever ``spec.truncate`` is set.
    """
    d = np.asarray(distance, dtype=np.float64)
    if np.any(d < 0):
        raise ValueError("distance must be non-negative")
    out = _scaled_weights(spec, d)
    if np.ndim(distance) == 0:
        return float(out)
    return out
