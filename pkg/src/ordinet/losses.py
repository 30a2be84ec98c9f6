"""Ordinal loss functions with values and analytic gradients.

All losses reduce by batch mean, so learning-rate choices transfer across
batch sizes. Gradients are taken with respect to the quantity each loss
consumes: logits for the soft-label cross-entropy, probabilities for the
continuous weighted-kappa loss, sigmoids for the template MSE.
"""

from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .output_layers import EcocTemplates
from .soft_labels import SoftLabelTable, blend, targets_for

POWERS = ("linear", "quadratic")


@dataclass(frozen=True)
class PenalizationMatrix:
    """Misclassification costs |j - k|^p / (J-1)^p with p = 1 or 2."""

    num_classes: int
    power: str
    entries: np.ndarray = field(repr=False)

    def __post_init__(self):
        self.entries.setflags(write=False)


def penalization_matrix(num_classes: int, power: str = "quadratic") -> PenalizationMatrix:
    if num_classes < 2:
        raise ValueError(f"num_classes must be >= 2, got {num_classes}")
    if power not in POWERS:
        raise ValueError(f"power must be one of {POWERS}, got {power!r}")
    p = 1 if power == "linear" else 2
    idx = np.arange(num_classes, dtype=np.float64)
    entries = np.abs(idx[:, None] - idx[None, :]) ** p / (num_classes - 1) ** p
    return PenalizationMatrix(num_classes, power, entries)


@dataclass
class LossResult:
    value: float
    gradient: np.ndarray


def _check_labels(labels, num_classes):
    labels = np.asarray(labels, dtype=np.int64)
    if labels.size == 0:
        raise ValueError("empty batch")
    if labels.min() < 0 or labels.max() >= num_classes:
        raise ValueError(f"labels must lie in [0, {num_classes})")
    return labels


def soft_ce_loss(logits, labels, table: SoftLabelTable, eta: float) -> LossResult:
    """Cross-entropy of softmaxed logits against eta-blended soft targets.

    The gradient uses the fused softmax cross-entropy form (p - t)/N.
    """
    logits = np.ascontiguousarray(logits, dtype=np.float64)
    if logits.ndim != 2 or logits.shape[1] != table.num_classes:
        raise ValueError(
            f"logits must be (N, {table.num_classes}), got {logits.shape}"
        )
    labels = _check_labels(labels, table.num_classes)
    if labels.shape[0] != logits.shape[0]:
        raise ValueError("logits and labels disagree on batch size")
    targets = targets_for(blend(table, eta), labels)
    value, grad = kernels.softmax_xent(logits, targets)
    return LossResult(value, grad)


def ce_on_probs(probs, targets) -> LossResult:
    """Cross-entropy consumed directly on probabilities (clamped before log).

    Used when an output head already produced a probability matrix; the
    gradient is -t/p per entry (zero where the clamp engaged).
    """
    probs = np.ascontiguousarray(probs, dtype=np.float64)
    targets = np.ascontiguousarray(targets, dtype=np.float64)
    if probs.shape != targets.shape:
        raise ValueError("probs and targets must share a shape")
    value, grad = kernels.xent_on_probs(probs, targets)
    return LossResult(value, grad)


def wk_loss(
    probs, labels, omega: PenalizationMatrix, epsilon: float = 1e-9
) -> LossResult:
    """Continuous weighted-kappa disagreement ratio.

    Observed disagreement sums omega[y_i][k] * p_ik; expected disagreement
    pairs the batch column marginals of p with those of omega rows. The
    ratio is 0 exactly at one-hot-correct predictions and differentiable
    everywhere thanks to the epsilon guard.
    """
    probs = np.ascontiguousarray(probs, dtype=np.float64)
    if probs.ndim != 2 or probs.shape[1] != omega.num_classes:
        raise ValueError(f"probs must be (N, {omega.num_classes}), got {probs.shape}")
    labels = _check_labels(labels, omega.num_classes)
    if labels.shape[0] != probs.shape[0]:
        raise ValueError("probs and labels disagree on batch size")
    value, grad = kernels.wk_value_grad(probs, labels, omega.entries, epsilon)
    return LossResult(value, grad)


def ecoc_mse_loss(outputs, labels, templates: EcocTemplates) -> LossResult:
    """Mean squared distance between sigmoid outputs and the true template."""
    outputs = np.ascontiguousarray(outputs, dtype=np.float64)
    if outputs.ndim != 2 or outputs.shape[1] != templates.num_classes - 1:
        raise ValueError(
            f"outputs must be (N, {templates.num_classes - 1}), got {outputs.shape}"
        )
    labels = _check_labels(labels, templates.num_classes)
    if labels.shape[0] != outputs.shape[0]:
        raise ValueError("outputs and labels disagree on batch size")
    n, width = outputs.shape
    diff = outputs - templates.matrix[labels]
    value = float(np.sum(diff * diff)) / (n * width)
    grad = 2.0 * diff / (n * width)
    return LossResult(value, grad)


# ---------------------------------------------------------------------------
# loss specifications consumed by the trainer
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SoftCE:
    """Soft-label cross-entropy; pairs with probability-producing heads."""

    table: SoftLabelTable
    eta: float = 1.0


@dataclass(frozen=True)
class WK:
    """Weighted-kappa loss; pairs with probability-producing heads."""

    power: str = "quadratic"
    epsilon: float = 1e-9


@dataclass(frozen=True)
class EcocMse:
    """Template MSE; pairs with the binary-decomposition head."""
