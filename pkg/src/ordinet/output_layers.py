"""Ordinal output heads: cumulative link, stick-breaking, and binary decomposition.

Each head maps raw network output to ordered-class probabilities (or, for
the binary decomposition, to per-threshold sigmoids) and ships an analytic
backward pass. The heavy per-batch arithmetic lives in :mod:`ordinet.kernels`.
"""

from dataclasses import dataclass, field

import numpy as np

from . import kernels

LINKS = ("logit", "probit", "cloglog")

_LINK_IDS = {"logit": 0, "probit": 1, "cloglog": 2}


@dataclass
class ClmParams:
    """Cumulative-link parameters with monotone thresholds by construction.

    The J-1 effective thresholds are ``b_1 + cumsum(raw_increments ** 2)``,
    so any unconstrained raw values yield a non-decreasing sequence and
    the optimizer never needs projection steps.
    """

    base_threshold: float
    raw_increments: np.ndarray
    link: str = "logit"

    def __post_init__(self):
        self.raw_increments = np.asarray(self.raw_increments, dtype=np.float64)
        if self.raw_increments.ndim != 1:
            raise ValueError("raw_increments must be a 1-D vector")
        if self.link not in LINKS:
            raise ValueError(f"link must be one of {LINKS}, got {self.link!r}")

    @property
    def num_classes(self) -> int:
        return self.raw_increments.shape[0] + 2

    def thresholds(self) -> np.ndarray:
        """Effective thresholds b_k, non-decreasing for any raw values."""
        steps = np.cumsum(self.raw_increments**2)
        return np.concatenate(([self.base_threshold], self.base_threshold + steps))

    @classmethod
    def evenly_spaced(cls, num_classes: int, link: str = "logit") -> "ClmParams":
        """Thresholds at the J-1 interior points of a uniform grid on [-2, 2]."""
        if num_classes < 2:
            raise ValueError(f"num_classes must be >= 2, got {num_classes}")
        t = -2.0 + 4.0 * np.arange(1, num_classes) / num_classes
        return cls(float(t[0]), np.sqrt(np.diff(t)), link)


def clm_forward(projection, params: ClmParams) -> np.ndarray:
    """Ordered-class probabilities from scalar projections.

    Cumulative probabilities are g(b_k - f) through the link CDF; adjacent
    differences give the class probabilities.
    """
    projection = np.ascontiguousarray(projection, dtype=np.float64).reshape(-1)
    if not np.all(np.isfinite(projection)):
        raise ValueError("projection contains non-finite values")
    return kernels.clm_forward(projection, params.thresholds(), _LINK_IDS[params.link])


def clm_backward(projection, params: ClmParams, upstream):
    """Gradients of a scalar loss wrt projection, base threshold, increments.

    ``upstream`` is the loss gradient wrt the probability matrix. Returns
    ``(grad_projection, grad_base_threshold, grad_raw_increments)``.
    """
    projection = np.ascontiguousarray(projection, dtype=np.float64).reshape(-1)
    upstream = np.ascontiguousarray(upstream, dtype=np.float64)
    grad_proj, grad_thr = kernels.clm_backward(
        projection, params.thresholds(), _LINK_IDS[params.link], upstream
    )
    # chain through b_k = b_1 + sum_{m<=k} delta_m^2
    grad_base = float(grad_thr.sum())
    tail = np.cumsum(grad_thr[::-1])[::-1]
    grad_raw = 2.0 * params.raw_increments * tail[1:]
    return grad_proj, grad_base, grad_raw


def stick_breaking_forward(logits) -> np.ndarray:
    """Each logit claims a logistic share of the remaining probability mass."""
    logits = np.ascontiguousarray(logits, dtype=np.float64)
    return kernels.sb_forward(logits)


def stick_breaking_backward(logits, upstream) -> np.ndarray:
    logits = np.ascontiguousarray(logits, dtype=np.float64)
    upstream = np.ascontiguousarray(upstream, dtype=np.float64)
    return kernels.sb_backward(logits, upstream)


def obd_forward(logits) -> np.ndarray:
    """Element-wise sigmoids; output m estimates P(class > m)."""
    return kernels.sigmoid(np.asarray(logits, dtype=np.float64))


def obd_backward(logits, upstream) -> np.ndarray:
    s = obd_forward(logits)
    return upstream * s * (1.0 - s)


@dataclass(frozen=True)
class EcocTemplates:
    """Ideal binary output vectors: class j maps to j ones then zeros."""

    num_classes: int
    matrix: np.ndarray = field(repr=False)

    def __post_init__(self):
        self.matrix.setflags(write=False)


def ecoc_templates(num_classes: int) -> EcocTemplates:
    if num_classes < 2:
        raise ValueError(f"num_classes must be >= 2, got {num_classes}")
    j = num_classes
    matrix = (np.arange(j - 1)[None, :] < np.arange(j)[:, None]).astype(np.float64)
    return EcocTemplates(j, matrix)


def ecoc_decode(outputs, templates: EcocTemplates) -> np.ndarray:
    """Nearest template by squared distance; ties go to the lower class."""
    outputs = np.asarray(outputs, dtype=np.float64)
    diff = outputs[:, None, :] - templates.matrix[None, :, :]
    dist = np.einsum("ijk,ijk->ij", diff, diff)
    return np.argmin(dist, axis=1).astype(np.int64)
