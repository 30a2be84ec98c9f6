"""Benchmark harness: config parsing, randomized search, multi-seed sweeps.

Per (dataset, estimator, seed) cell: stratified 75/25 train-test split,
a stratified validation part carved from the training split, feature
standardization with training statistics, randomized hyperparameter
search, a final fit with the chosen configuration, and test metrics.
Aggregates are mean/SD over seeds.

Model selection uses the estimator's own loss evaluated on the held-out
validation split (one fit per sampled configuration) instead of an inner
3-fold cross-validation; the deviation is recorded in the run metadata.
"""

import csv
import itertools
import json
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import data, kernels, metrics, registry
from .nn_core import TrainConfig, build_model, fit, loss_value, predict_proba

PROTOCOL_NOTES = [
    "hyperparameters selected on a held-out stratified validation split "
    "(single fit per candidate) rather than an inner 3-fold cross-validation",
    "selection criterion: the estimator's own training loss evaluated on "
    "the validation split",
]


class ConfigError(Exception):
    """Malformed benchmark configuration."""


class DataError(Exception):
    """Dataset could not be resolved or parsed."""


@dataclass
class RunRecord:
    dataset: str
    estimator: str
    seed: int
    qwk: float = float("nan")
    mae: float = float("nan")
    ccr: float = float("nan")
    time_seconds: float = 0.0
    chosen_hyperparameters: dict = field(default_factory=dict)
    status: str = "ok"
    error: str = ""


# ---------------------------------------------------------------------------
# configuration
# ---------------------------------------------------------------------------

TRAINER_DEFAULTS = {
    "batch_size": 128,
    "max_epochs": 100,
    "patience": 40,
    "optimizer": "adam",
}

PROTOCOL_DEFAULTS = {
    "num_seeds": 20,
    "search_budget": 15,
    "test_fraction": 0.25,
    "validation_fraction": 0.15,
    "hidden_dims": [32],
    "activation": "relu",
}


def load_config(path) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            raw = json.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc})") from None
    return normalize_config(raw)


def normalize_config(raw: dict) -> dict:
    """Validate and fill defaults; raises ConfigError on any problem."""
    if not isinstance(raw, dict):
        raise ConfigError("config root must be an object")

    datasets = raw.get("datasets")
    if not datasets or not isinstance(datasets, list):
        raise ConfigError("config needs a non-empty 'datasets' list")
    seen = set()
    norm_datasets = []
    for entry in datasets:
        if not isinstance(entry, dict) or "name" not in entry:
            raise ConfigError("each dataset entry needs a 'name'")
        name = entry["name"]
        if name in seen:
            raise ConfigError(f"duplicate dataset name {name!r}")
        seen.add(name)
        if ("path" in entry) == ("synthetic" in entry):
            raise ConfigError(f"dataset {name!r}: give exactly one of 'path'/'synthetic'")
        norm_datasets.append(dict(entry))

    estimators = raw.get("estimators")
    if not estimators or not isinstance(estimators, list):
        raise ConfigError("config needs a non-empty 'estimators' list")
    templates = {cfg.method: cfg for cfg in registry.registry()}
    norm_estimators = []
    for entry in estimators:
        if isinstance(entry, str):
            entry = {"method": entry}
        if not isinstance(entry, dict) or "method" not in entry:
            raise ConfigError("each estimator entry needs a 'method'")
        method = entry["method"]
        if method not in templates:
            raise ConfigError(
                f"unknown method {method!r}; see list-methods for the registry"
            )
        base = templates[method]
        hp = {**base.hyperparameters, **entry.get("hyperparameters", {})}
        grid = {**base.grid, **entry.get("grid", {})}
        for gname, values in grid.items():
            if gname not in hp:
                raise ConfigError(f"{method}: grid entry {gname!r} is not a hyperparameter")
            if not isinstance(values, list) or not values:
                raise ConfigError(f"{method}: grid for {gname!r} must be a non-empty list")
        norm_estimators.append({"method": method, "hyperparameters": hp, "grid": grid})

    protocol = {**PROTOCOL_DEFAULTS, **raw.get("protocol", {})}
    trainer = {**TRAINER_DEFAULTS, **protocol.get("trainer", {})}
    protocol["trainer"] = trainer
    if "seeds" in protocol:
        seeds = [int(s) for s in protocol["seeds"]]
    else:
        seeds = list(range(int(protocol["num_seeds"])))
    if not seeds:
        raise ConfigError("protocol needs at least one seed")
    protocol["seeds"] = seeds
    protocol.pop("num_seeds", None)
    if int(protocol["search_budget"]) < 1:
        raise ConfigError("search_budget must be >= 1")
    for key in ("test_fraction", "validation_fraction"):
        if not 0.0 < float(protocol[key]) < 1.0:
            raise ConfigError(f"{key} must lie in (0, 1)")

    return {"datasets": norm_datasets, "estimators": norm_estimators, "protocol": protocol}


def resolve_dataset(entry: dict) -> data.Dataset:
    if "synthetic" in entry:
        try:
            cfg = data.SynthConfig(**entry["synthetic"])
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"dataset {entry['name']!r}: {exc}") from None
        return data.generate_synthetic(cfg)
    try:
        return data.load_csv(
            entry["path"],
            label_column=entry.get("label_column"),
            categories=entry.get("categories"),
            num_classes=entry.get("num_classes"),
        )
    except FileNotFoundError:
        raise DataError(f"dataset {entry['name']!r}: file not found: {entry['path']}") from None
    except ValueError as exc:
        raise DataError(f"dataset {entry['name']!r}: {exc}") from None


# ---------------------------------------------------------------------------
# search and cells
# ---------------------------------------------------------------------------


def expand_grid(grid: dict) -> list:
    """All grid combinations in declaration order."""
    names = list(grid)
    combos = []
    for values in itertools.product(*(grid[n] for n in names)):
        combos.append(dict(zip(names, values)))
    return combos


def _fit_candidate(method, hp, train, val, protocol, seed):
    spec = registry.build_spec(
        method,
        input_dim=train.X.shape[1],
        num_classes=train.num_classes,
        hidden_dims=protocol["hidden_dims"],
        activation=protocol["activation"],
    )
    loss = registry.build_loss(method, hp, train.num_classes)
    trainer = protocol["trainer"]
    config = TrainConfig(
        learning_rate=hp["learning_rate"],
        batch_size=trainer["batch_size"],
        max_epochs=trainer["max_epochs"],
        patience=trainer["patience"],
        optimizer=trainer["optimizer"],
        seed=seed,
    )
    model = build_model(spec, seed)
    fit(model, train.X, train.y, val.X, val.y, config, loss)
    return model, loss


def random_search(estimator: dict, train, val, budget: int, seed: int, protocol: dict) -> dict:
    """Sample up to ``budget`` distinct grid points; return the one with the
    lowest validation loss (ties to the earliest sampled)."""
    if budget < 1:
        raise ConfigError("search budget must be >= 1")
    combos = expand_grid(estimator["grid"])
    if not combos:
        raise ConfigError(f"{estimator['method']}: empty hyperparameter grid")
    rng = np.random.default_rng(seed)
    picks = rng.choice(len(combos), size=min(budget, len(combos)), replace=False)
    best_hp = None
    best_loss = np.inf
    for idx in picks:
        hp = {**estimator["hyperparameters"], **combos[int(idx)]}
        model, loss = _fit_candidate(estimator["method"], hp, train, val, protocol, seed)
        val_loss = loss_value(model, val.X, val.y, loss)
        if val_loss < best_loss:
            best_loss = val_loss
            best_hp = hp
    return best_hp


def run_cell(dataset_name: str, dataset: data.Dataset, estimator: dict, seed: int, protocol: dict) -> RunRecord:
    """One (dataset, estimator, seed) benchmark cell; never raises."""
    record = RunRecord(dataset_name, estimator["method"], seed)
    try:
        train_full, test = data.stratified_split(dataset, protocol["test_fraction"], seed)
        train, val = data.stratified_split(train_full, protocol["validation_fraction"], seed)
        train, val, test = data.standardize(train, val, test)

        t0 = time.perf_counter()
        chosen = random_search(
            estimator, train, val, int(protocol["search_budget"]), seed, protocol
        )
        model, _ = _fit_candidate(estimator["method"], chosen, train, val, protocol, seed)
        probs = predict_proba(model, test.X)
        record.qwk = metrics.qwk(test.y, probs, num_classes=test.num_classes)
        record.mae = metrics.mae(test.y, probs)
        record.ccr = metrics.ccr(test.y, probs)
        record.time_seconds = time.perf_counter() - t0
        record.chosen_hyperparameters = chosen
    except Exception as exc:  # noqa: BLE001 - failed cells must not kill the sweep
        record.status = "error"
        record.error = f"{type(exc).__name__}: {exc}"
    return record


def _run_cell_args(args):
    return run_cell(*args)


# ---------------------------------------------------------------------------
# the sweep
# ---------------------------------------------------------------------------


def run_benchmark(config: dict, out_dir, jobs: int = 1):
    """Execute the full sweep and write runs.csv / summary.csv / summary.md.

    Returns (records, summary_rows). Failed cells are recorded with an
    error status and excluded from aggregates.
    """
    config = normalize_config(config)
    protocol = config["protocol"]
    datasets = [(entry["name"], resolve_dataset(entry)) for entry in config["datasets"]]

    cells = [
        (name, dataset, estimator, seed, protocol)
        for name, dataset in datasets
        for estimator in config["estimators"]
        for seed in protocol["seeds"]
    ]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            records = list(pool.map(_run_cell_args, cells))
    else:
        records = [run_cell(*cell) for cell in cells]

    summary = aggregate(records, config)
    os.makedirs(out_dir, exist_ok=True)
    write_runs_csv(os.path.join(out_dir, "runs.csv"), records)
    write_summary_csv(os.path.join(out_dir, "summary.csv"), summary)
    write_summary_md(os.path.join(out_dir, "summary.md"), summary)
    metadata = {
        "config": config,
        "notes": PROTOCOL_NOTES,
        "backend": kernels.active_backend(),
        "failed_runs": sum(1 for r in records if r.status != "ok"),
        "jobs": jobs,
    }
    with open(os.path.join(out_dir, "metadata.json"), "w", encoding="utf-8") as fh:
        json.dump(metadata, fh, indent=2)
    return records, summary


def aggregate(records, config) -> list:
    """Mean/SD rows per (dataset, estimator) over completed runs."""
    rows = []
    for entry in config["datasets"]:
        for estimator in config["estimators"]:
            cell = [
                r
                for r in records
                if r.dataset == entry["name"]
                and r.estimator == estimator["method"]
                and r.status == "ok"
            ]
            row = {"dataset": entry["name"], "estimator": estimator["method"]}
            for name in ("qwk", "mae", "ccr"):
                vals = np.array([getattr(r, name) for r in cell])
                row[f"{name}_mean"] = float(vals.mean()) if cell else float("nan")
                row[f"{name}_sd"] = float(vals.std(ddof=1)) if len(cell) > 1 else 0.0
            times = np.array([r.time_seconds for r in cell])
            row["time_mean"] = float(times.mean()) if cell else float("nan")
            row["time_sd"] = float(times.std(ddof=1)) if len(cell) > 1 else 0.0
            rows.append(row)
    return rows


RUN_COLUMNS = (
    "dataset",
    "estimator",
    "seed",
    "qwk",
    "mae",
    "ccr",
    "time_seconds",
    "chosen_hyperparameters",
    "status",
    "error",
)

SUMMARY_COLUMNS = (
    "dataset",
    "estimator",
    "qwk_mean",
    "qwk_sd",
    "mae_mean",
    "mae_sd",
    "ccr_mean",
    "ccr_sd",
    "time_mean",
    "time_sd",
)


def write_runs_csv(path, records) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(RUN_COLUMNS)
        for r in records:
            writer.writerow(
                [
                    r.dataset,
                    r.estimator,
                    r.seed,
                    repr(r.qwk),
                    repr(r.mae),
                    repr(r.ccr),
                    repr(r.time_seconds),
                    json.dumps(r.chosen_hyperparameters, sort_keys=True),
                    r.status,
                    r.error,
                ]
            )


def read_runs_csv(path) -> list:
    records = []
    with open(path, newline="", encoding="utf-8") as fh:
        for row in csv.DictReader(fh):
            records.append(
                RunRecord(
                    dataset=row["dataset"],
                    estimator=row["estimator"],
                    seed=int(row["seed"]),
                    qwk=float(row["qwk"]),
                    mae=float(row["mae"]),
                    ccr=float(row["ccr"]),
                    time_seconds=float(row["time_seconds"]),
                    chosen_hyperparameters=json.loads(row["chosen_hyperparameters"]),
                    status=row["status"],
                    error=row["error"],
                )
            )
    return records


def write_summary_csv(path, summary) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(SUMMARY_COLUMNS)
        for row in summary:
            writer.writerow(
                [row["dataset"], row["estimator"]]
                + [repr(row[c]) for c in SUMMARY_COLUMNS[2:]]
            )


def write_summary_md(path, summary) -> None:
    lines = [
        "| Dataset | Estimator | QWK | MAE | CCR | Time (s) |",
        "| --- | --- | --- | --- | --- | --- |",
    ]
    for row in summary:
        cells = [row["dataset"], row["estimator"]]
        for name in ("qwk", "mae", "ccr"):
            cells.append(f"{row[f'{name}_mean']:.3f} ± {row[f'{name}_sd']:.3f}")
        cells.append(f"{row['time_mean']:.2f} ± {row['time_sd']:.2f}")
        lines.append("| " + " | ".join(str(c) for c in cells) + " |")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")
