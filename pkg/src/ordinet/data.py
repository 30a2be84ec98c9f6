"""Datasets: synthetic latent-threshold generation, CSV I/O, splitting, scaling.

The synthetic generator draws standard-normal features, projects them onto
a fixed unit direction, perturbs with Gaussian noise, and cuts the latent
score at empirical quantiles. That is exactly the data-generating process
a cumulative link model assumes, which makes benchmark orderings
interpretable, and the quantile cuts give sample-exact class proportions.
"""

import csv
import math
from dataclasses import dataclass

import numpy as np


@dataclass
class Dataset:
    X: np.ndarray
    y: np.ndarray
    num_classes: int
    feature_names: list | None = None

    def __post_init__(self):
        self.X = np.asarray(self.X, dtype=np.float64)
        self.y = np.asarray(self.y, dtype=np.int64)
        if self.X.ndim != 2:
            raise ValueError("X must be 2-D")
        if self.y.shape != (self.X.shape[0],):
            raise ValueError("y length must match X rows")
        if self.y.size and (self.y.min() < 0 or self.y.max() >= self.num_classes):
            raise ValueError(f"labels must lie in [0, {self.num_classes})")

    @property
    def n(self) -> int:
        return self.X.shape[0]


@dataclass(frozen=True)
class SynthConfig:
    n_samples: int
    n_features: int
    num_classes: int
    noise_sd: float = 0.5
    imbalance: tuple | None = None
    seed: int = 0

    def __post_init__(self):
        if self.n_samples < self.num_classes:
            raise ValueError("need at least one sample per class")
        if self.n_features < 1:
            raise ValueError("n_features must be >= 1")
        if self.num_classes < 2:
            raise ValueError("num_classes must be >= 2")
        if self.noise_sd < 0:
            raise ValueError("noise_sd must be >= 0")
        if self.imbalance is not None:
            props = np.asarray(self.imbalance, dtype=np.float64)
            if props.shape != (self.num_classes,):
                raise ValueError("imbalance must list one proportion per class")
            if props.min() <= 0:
                raise ValueError("class proportions must be positive")
            if abs(props.sum() - 1.0) > 1e-9:
                raise ValueError("class proportions must sum to 1")
            object.__setattr__(self, "imbalance", tuple(float(p) for p in props))


def generate_synthetic(config: SynthConfig) -> Dataset:
    """Latent-threshold ordinal data, deterministic under the config seed."""
    rng = np.random.default_rng(config.seed)
    w = rng.normal(size=config.n_features)
    w /= np.linalg.norm(w)
    X = rng.normal(size=(config.n_samples, config.n_features))
    z = X @ w + config.noise_sd * rng.normal(size=config.n_samples)

    props = (
        np.full(config.num_classes, 1.0 / config.num_classes)
        if config.imbalance is None
        else np.asarray(config.imbalance)
    )
    edges = np.round(np.cumsum(props) * config.n_samples).astype(int)
    edges[-1] = config.n_samples
    order = np.argsort(z, kind="stable")
    y = np.empty(config.n_samples, dtype=np.int64)
    start = 0
    for label, stop in enumerate(edges):
        y[order[start:stop]] = label
        start = stop
    return Dataset(X, y, config.num_classes)


def load_csv(path, label_column=None, categories=None, num_classes=None) -> Dataset:
    """Read a dataset from a header-carrying CSV.

    ``label_column`` names the label column (default: last column). Labels
    are integers 0..J-1, or strings looked up in the ordered ``categories``
    list. J comes from ``num_classes``, ``categories``, or max label + 1.
    """
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ValueError(f"{path}: empty file, expected a header row") from None
        rows = list(reader)

    if label_column is None:
        label_idx = len(header) - 1
    else:
        try:
            label_idx = header.index(label_column)
        except ValueError:
            raise ValueError(f"{path}: no column named {label_column!r}") from None

    feature_names = [h for i, h in enumerate(header) if i != label_idx]
    if not feature_names:
        raise ValueError(f"{path}: no feature columns besides the label")

    X = np.empty((len(rows), len(feature_names)))
    labels = []
    for r, row in enumerate(rows):
        if len(row) != len(header):
            raise ValueError(
                f"{path}: row {r + 2} has {len(row)} cells, header has {len(header)}"
            )
        f = 0
        for c, cell in enumerate(row):
            if c == label_idx:
                labels.append(cell.strip())
                continue
            try:
                X[r, f] = float(cell)
            except ValueError:
                raise ValueError(
                    f"{path}: row {r + 2}, column {header[c]!r}: "
                    f"non-numeric value {cell!r}"
                ) from None
            f += 1

    if categories is not None:
        lookup = {name: i for i, name in enumerate(categories)}
        y = np.empty(len(labels), dtype=np.int64)
        for r, cell in enumerate(labels):
            if cell not in lookup:
                raise ValueError(
                    f"{path}: row {r + 2}: unknown category {cell!r}, "
                    f"expected one of {list(categories)}"
                )
            y[r] = lookup[cell]
        j = num_classes if num_classes is not None else len(categories)
    else:
        y = np.empty(len(labels), dtype=np.int64)
        for r, cell in enumerate(labels):
            try:
                val = float(cell)
            except ValueError:
                raise ValueError(
                    f"{path}: row {r + 2}: label {cell!r} is not an integer "
                    "(pass categories= for string labels)"
                ) from None
            if not val.is_integer():
                raise ValueError(f"{path}: row {r + 2}: label {cell!r} is not an integer")
            y[r] = int(val)
        j = num_classes if num_classes is not None else (int(y.max()) + 1 if y.size else 2)

    if y.size and (y.min() < 0 or y.max() >= j):
        bad = int(y.min()) if y.min() < 0 else int(y.max())
        raise ValueError(f"{path}: label {bad} outside [0, {j})")
    return Dataset(X, y, j, feature_names=feature_names)


def save_csv(dataset: Dataset, path) -> None:
    """Write features plus a final integer ``label`` column, 17-digit decimals."""
    names = dataset.feature_names or [f"x{i}" for i in range(dataset.X.shape[1])]
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow([*names, "label"])
        for row, label in zip(dataset.X, dataset.y):
            writer.writerow([*(f"{v:.17g}" for v in row), int(label)])


def stratified_split(dataset: Dataset, test_fraction: float, seed: int):
    """Per-class split: each class's test share is within one sample of the
    requested fraction. Returns (train, test), deterministic under seed."""
    if not 0.0 < test_fraction < 1.0:
        raise ValueError(f"test_fraction must be in (0, 1), got {test_fraction}")
    rng = np.random.default_rng(seed)
    test_idx = []
    for c in range(dataset.num_classes):
        members = np.flatnonzero(dataset.y == c)
        if members.size < 2:
            raise ValueError(
                f"class {c} has {members.size} sample(s); need >= 2 to stratify"
            )
        take = int(math.floor(test_fraction * members.size + 0.5))
        test_idx.append(rng.permutation(members)[:take])
    test_mask = np.zeros(dataset.n, dtype=bool)
    test_mask[np.concatenate(test_idx)] = True
    names = dataset.feature_names
    train = Dataset(dataset.X[~test_mask], dataset.y[~test_mask], dataset.num_classes, names)
    test = Dataset(dataset.X[test_mask], dataset.y[test_mask], dataset.num_classes, names)
    return train, test


def standardize(train: Dataset, *others: Dataset):
    """Scale every dataset by the training set's per-feature mean and SD.

    Zero-variance features carry no information and are mapped to 0
    everywhere. Returns the transformed datasets in argument order.
    """
    if train.n == 0:
        raise ValueError("empty training set")
    mean = train.X.mean(axis=0)
    sd = train.X.std(axis=0)
    dead = sd == 0.0
    safe_sd = np.where(dead, 1.0, sd)

    def transform(ds):
        X = (ds.X - mean) / safe_sd
        X[:, dead] = 0.0
        return Dataset(X, ds.y.copy(), ds.num_classes, ds.feature_names)

    return tuple(transform(ds) for ds in (train, *others))
