"""Evaluation metrics for ordered-class predictions.

Predictions may be hard labels or an N x J probability matrix; probability
input is converted by row argmax (ties to the lower class). ``rps`` is the
exception: it needs the probabilities themselves.
"""

import warnings

import numpy as np

REPORT_KEYS = ("ccr", "mae", "one_off", "amae", "mmae", "qwk", "rps", "gmsec")


def _as_labels(pred) -> np.ndarray:
    pred = np.asarray(pred)
    if pred.ndim == 2:
        return np.argmax(pred, axis=1).astype(np.int64)
    return pred.astype(np.int64)


def _check(y_true, pred):
    y_true = np.asarray(y_true, dtype=np.int64)
    y_pred = _as_labels(pred)
    if y_true.size == 0:
        raise ValueError("empty input")
    if y_true.shape != y_pred.shape:
        raise ValueError("true and predicted label counts disagree")
    return y_true, y_pred


def _infer_classes(y_true, y_pred, num_classes):
    if num_classes is not None:
        return int(num_classes)
    return int(max(y_true.max(), y_pred.max())) + 1


def ccr(y_true, pred) -> float:
    """Correct classification rate."""
    y_true, y_pred = _check(y_true, pred)
    return float(np.mean(y_true == y_pred))


def mae(y_true, pred) -> float:
    """Mean absolute error between label indices."""
    y_true, y_pred = _check(y_true, pred)
    return float(np.mean(np.abs(y_true - y_pred)))


def one_off(y_true, pred) -> float:
    """Fraction of predictions within one category of the truth."""
    y_true, y_pred = _check(y_true, pred)
    return float(np.mean(np.abs(y_true - y_pred) <= 1))


def _per_class_mae(y_true, y_pred, num_classes):
    values = []
    absent = []
    for c in range(num_classes):
        sel = y_true == c
        if not sel.any():
            absent.append(c)
            continue
        values.append(np.abs(y_true[sel] - y_pred[sel]).mean())
    if absent:
        warnings.warn(
            f"classes {absent} absent from y_true; excluded from per-class MAE",
            UserWarning,
            stacklevel=3,
        )
    return np.array(values)


def amae(y_true, pred, num_classes=None) -> float:
    """Mean over classes of the per-class MAE; robust to class imbalance.

    Classes absent from y_true are excluded (with a warning) rather than
    aborting the evaluation.
    """
    y_true, y_pred = _check(y_true, pred)
    j = _infer_classes(y_true, y_pred, num_classes)
    return float(_per_class_mae(y_true, y_pred, j).mean())


def mmae(y_true, pred, num_classes=None) -> float:
    """Maximum over classes of the per-class MAE."""
    y_true, y_pred = _check(y_true, pred)
    j = _infer_classes(y_true, y_pred, num_classes)
    return float(_per_class_mae(y_true, y_pred, j).max())


def qwk(y_true, pred, num_classes=None) -> float:
    """Quadratic weighted kappa from the hard-label confusion matrix.

    kappa = 1 - sum(w * O) / sum(w * E) with O the confusion counts, E the
    outer product of the marginals divided by N, and w the squared ordinal
    distance normalized by (J-1)^2. A degenerate chance term (single class
    observed and predicted) returns 0.
    """
    y_true, y_pred = _check(y_true, pred)
    j = _infer_classes(y_true, y_pred, num_classes)
    n = y_true.shape[0]
    observed = np.zeros((j, j))
    np.add.at(observed, (y_true, y_pred), 1.0)
    expected = np.outer(observed.sum(axis=1), observed.sum(axis=0)) / n
    idx = np.arange(j, dtype=np.float64)
    w = (idx[:, None] - idx[None, :]) ** 2 / max(j - 1, 1) ** 2
    denom = float(np.sum(w * expected))
    if denom == 0.0:
        return 0.0
    return float(1.0 - np.sum(w * observed) / denom)


def rps(y_true, probs) -> float:
    """Ranked probability score: squared gap between cumulative distributions."""
    probs = np.asarray(probs, dtype=np.float64)
    if probs.ndim != 2:
        raise ValueError("rps requires an N x J probability matrix")
    y_true = np.asarray(y_true, dtype=np.int64)
    if y_true.size == 0:
        raise ValueError("empty input")
    if y_true.shape[0] != probs.shape[0]:
        raise ValueError("true labels and probability rows disagree")
    cum_p = np.cumsum(probs, axis=1)
    cum_y = (np.arange(probs.shape[1])[None, :] >= y_true[:, None]).astype(np.float64)
    return float(np.mean(np.sum((cum_p - cum_y) ** 2, axis=1)))


def gmsec(y_true, pred, num_classes=None) -> float:
    """Geometric mean of the recalls of the first and last classes."""
    y_true, y_pred = _check(y_true, pred)
    j = _infer_classes(y_true, y_pred, num_classes)
    recalls = []
    for c in (0, j - 1):
        sel = y_true == c
        if not sel.any():
            raise ValueError(f"extreme class {c} absent from y_true")
        recalls.append(np.mean(y_pred[sel] == c))
    return float(np.sqrt(recalls[0] * recalls[1]))


def metric_report(y_true, probs, num_classes=None) -> dict:
    """All metrics as a flat name -> value record."""
    return {
        "ccr": ccr(y_true, probs),
        "mae": mae(y_true, probs),
        "one_off": one_off(y_true, probs),
        "amae": amae(y_true, probs, num_classes),
        "mmae": mmae(y_true, probs, num_classes),
        "qwk": qwk(y_true, probs, num_classes),
        "rps": rps(y_true, probs),
        "gmsec": gmsec(y_true, probs, num_classes),
    }
