"""Unimodal soft target distributions over ordered classes.

Each generator returns a row-stochastic J x J table whose row j is the
training target distribution for true class j. All rows are unimodal with
the peak at (or, for the truncated Poisson, tied with) the true class, so
mass decays with ordinal distance from the target. ``blend`` mixes a table
with one-hot targets through a smoothing factor.

Constructions:

- triangular: discrete adjacent-mass rule, ``alpha`` to each neighbour
  (interior rows keep ``1 - 2*alpha``, boundary rows ``1 - alpha``).
- exponential: mass proportional to ``exp(-|k - j|**t)``.
- binomial: Binomial(J-1, p_j) with ``p_j = (2j+1)/(2J)``, which puts the
  exact mode at j since ``floor(J * p_j) = j``.
- poisson: Poisson(rate j+1) on the truncated support {1..J}, renormalized.
  Integer rates tie pmf(rate) with pmf(rate-1), so row j may share its
  maximum between classes j-1 and j.
- beta: mass of a Beta density on the J equal subintervals of [0, 1]; the
  density mode is matched to the interval midpoint ``(j + 0.5)/J`` using a
  single concentration knob ``s > 2``.
"""

import math
from dataclasses import dataclass

import numpy as np

SOURCES = (
    "onehot",
    "poisson",
    "binomial",
    "exponential",
    "beta",
    "triangular",
    "blended",
)


@dataclass(frozen=True, eq=False)
class SoftLabelTable:
    """Row-stochastic matrix of per-class target distributions."""

    num_classes: int
    rows: np.ndarray
    source: str

    def __post_init__(self):
        if self.num_classes < 2:
            raise ValueError(f"num_classes must be >= 2, got {self.num_classes}")
        if self.rows.shape != (self.num_classes, self.num_classes):
            raise ValueError(
                f"rows must be ({self.num_classes}, {self.num_classes}), "
                f"got {self.rows.shape}"
            )
        if self.source not in SOURCES:
            raise ValueError(f"unknown source {self.source!r}")
        self.rows.setflags(write=False)

    def row(self, label: int) -> np.ndarray:
        return self.rows[label]

    def to_csv(self, path) -> None:
        """Write the table as J rows of J comma-separated 17-digit decimals."""
        np.savetxt(path, self.rows, delimiter=",", fmt="%.17g")


def _check_num_classes(num_classes):
    if num_classes < 2:
        raise ValueError(f"num_classes must be >= 2, got {num_classes}")


def onehot_table(num_classes: int) -> SoftLabelTable:
    """Identity table: the hard-label baseline the soft generators replace."""
    _check_num_classes(num_classes)
    return SoftLabelTable(num_classes, np.eye(num_classes), "onehot")


def triangular_table(num_classes: int, alpha: float) -> SoftLabelTable:
    """Adjacent-mass table: each neighbour of the true class receives alpha.

    alpha must lie in [0, 0.5); values below 1/3 keep the row argmax at the
    true class for interior rows as well.
    """
    _check_num_classes(num_classes)
    if not 0.0 <= alpha < 0.5:
        raise ValueError(f"alpha must be in [0, 0.5), got {alpha}")
    j = num_classes
    rows = np.zeros((j, j))
    for c in range(j):
        if c == 0:
            rows[c, 0] = 1.0 - alpha
            rows[c, 1] = alpha
        elif c == j - 1:
            rows[c, j - 1] = 1.0 - alpha
            rows[c, j - 2] = alpha
        else:
            rows[c, c] = 1.0 - 2.0 * alpha
            rows[c, c - 1] = alpha
            rows[c, c + 1] = alpha
    return SoftLabelTable(j, rows, "triangular")


def exponential_table(num_classes: int, exponent: float) -> SoftLabelTable:
    """Rows proportional to exp(-|k - j|**exponent), exponent > 0."""
    _check_num_classes(num_classes)
    if exponent <= 0.0:
        raise ValueError(f"exponent must be > 0, got {exponent}")
    j = num_classes
    k = np.arange(j, dtype=np.float64)
    dist = np.abs(k[None, :] - k[:, None])
    unnorm = np.exp(-(dist**exponent))
    rows = unnorm / unnorm.sum(axis=1, keepdims=True)
    return SoftLabelTable(j, rows, "exponential")


def binomial_table(num_classes: int) -> SoftLabelTable:
    """Rows from Binomial(J-1, (2j+1)/(2J)); the mode lands exactly on j."""
    _check_num_classes(num_classes)
    j = num_classes
    n = j - 1
    rows = np.empty((j, j))
    for c in range(j):
        p = (2 * c + 1) / (2 * j)
        for k in range(j):
            rows[c, k] = math.comb(n, k) * p**k * (1.0 - p) ** (n - k)
    return SoftLabelTable(j, rows, "binomial")


def poisson_table(num_classes: int) -> SoftLabelTable:
    """Rows from Poisson(j+1) pmf at {1..J}, renormalized to sum 1.

    Plain renormalization preserves pmf ratios, so the integer-rate tie
    pmf(rate-1) == pmf(rate) survives into the table.
    """
    _check_num_classes(num_classes)
    j = num_classes
    rows = np.empty((j, j))
    support = np.arange(1, j + 1, dtype=np.float64)
    for c in range(j):
        lam = float(c + 1)
        logpmf = support * math.log(lam) - lam - np.array(
            [math.lgamma(m + 1.0) for m in support]
        )
        pmf = np.exp(logpmf)
        rows[c] = pmf / pmf.sum()
    return SoftLabelTable(j, rows, "poisson")


def beta_table(num_classes: int, concentration: float = 10.0) -> SoftLabelTable:
    """Rows from a Beta density discretized over J equal bins of [0, 1].

    For class j the density mode is placed at the bin midpoint
    m_j = (j + 0.5)/J via a = m_j * (s - 2) + 1 and b = s - a, where
    s = concentration > 2 keeps both shape parameters above 1.
    """
    _check_num_classes(num_classes)
    if concentration <= 2.0:
        raise ValueError(f"concentration must be > 2, got {concentration}")
    j = num_classes
    edges = np.arange(j + 1, dtype=np.float64) / j
    rows = np.empty((j, j))
    for c in range(j):
        mode = (c + 0.5) / j
        a = mode * (concentration - 2.0) + 1.0
        b = concentration - a
        cdf = np.array([reg_incomplete_beta(x, a, b) for x in edges])
        masses = np.diff(cdf)
        rows[c] = masses / masses.sum()
    return SoftLabelTable(j, rows, "beta")


def blend(table: SoftLabelTable, eta: float) -> SoftLabelTable:
    """Convex mix (1 - eta) * one-hot + eta * table, eta in [0, 1]."""
    if not 0.0 <= eta <= 1.0:
        raise ValueError(f"eta must be in [0, 1], got {eta}")
    rows = (1.0 - eta) * np.eye(table.num_classes) + eta * table.rows
    return SoftLabelTable(table.num_classes, rows, "blended")


def targets_for(table: SoftLabelTable, labels) -> np.ndarray:
    """Stack the table rows selected by each label into an N x J matrix."""
    labels = np.asarray(labels, dtype=np.int64)
    if labels.size and (labels.min() < 0 or labels.max() >= table.num_classes):
        raise ValueError(
            f"labels must lie in [0, {table.num_classes}), "
            f"got range [{labels.min()}, {labels.max()}]"
        )
    if labels.size == 0:
        return np.empty((0, table.num_classes))
    return table.rows[labels]


# ---------------------------------------------------------------------------
# regularized incomplete beta via continued fraction (Lentz)
# ---------------------------------------------------------------------------


def _log_beta(a, b):
    return math.lgamma(a) + math.lgamma(b) - math.lgamma(a + b)


def _betacf(a, b, x):
    # modified Lentz evaluation; converges fast for x < (a+1)/(a+b+2)
    tiny = 1e-300
    qab = a + b
    qap = a + 1.0
    qam = a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < tiny:
        d = tiny
    d = 1.0 / d
    h = d
    for m in range(1, 400):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < tiny:
            d = tiny
        c = 1.0 + aa / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < tiny:
            d = tiny
        c = 1.0 + aa / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < 1e-15:
            break
    return h


def reg_incomplete_beta(x: float, a: float, b: float) -> float:
    """Regularized incomplete beta I_x(a, b), absolute accuracy ~1e-14."""
    if a <= 0.0 or b <= 0.0:
        raise ValueError("shape parameters must be positive")
    if x <= 0.0:
        return 0.0
    if x >= 1.0:
        return 1.0
    front = math.exp(a * math.log(x) + b * math.log1p(-x) - _log_beta(a, b))
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _betacf(a, b, x) / a
    return 1.0 - front * _betacf(b, a, 1.0 - x) / b
