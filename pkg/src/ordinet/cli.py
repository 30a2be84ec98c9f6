"""Command-line interface.

Subcommands:

- ``generate-data``: write a synthetic ordinal dataset as CSV
- ``evaluate``: print the full metric report for saved predictions
- ``list-methods``: show the estimator registry with search grids
- ``run``: execute a benchmark config and write result tables

Exit codes: 0 success, 1 configuration error, 2 data error, 3 internal error.
"""

import argparse
import json
import sys

import numpy as np

from . import data, harness, metrics, registry
from .harness import ConfigError, DataError


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="ordinet", description="ordinal classification benchmark toolkit"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("generate-data", help="write a synthetic ordinal dataset CSV")
    gen.add_argument("--out", required=True)
    gen.add_argument("--n", type=int, required=True, help="number of samples")
    gen.add_argument("--features", type=int, required=True)
    gen.add_argument("--classes", type=int, required=True)
    gen.add_argument("--noise", type=float, default=0.5, help="latent noise SD")
    gen.add_argument(
        "--proportions",
        default=None,
        help="comma-separated class proportions summing to 1",
    )
    gen.add_argument("--seed", type=int, default=0)

    ev = sub.add_parser("evaluate", help="metric report for saved predictions")
    ev.add_argument("--true", dest="true_path", required=True,
                    help="CSV whose last column holds the true labels")
    ev.add_argument("--proba", dest="proba_path", required=True,
                    help="CSV of predicted class probabilities, one row per sample")
    ev.add_argument("--classes", type=int, default=None)

    sub.add_parser("list-methods", help="print the estimator registry")

    run = sub.add_parser("run", help="execute a benchmark config")
    run.add_argument("--config", required=True)
    run.add_argument("--out", required=True)
    run.add_argument("--jobs", type=int, default=1,
                     help="parallel (dataset, estimator, seed) cells")
    return parser


def _cmd_generate_data(args) -> int:
    proportions = None
    if args.proportions:
        try:
            proportions = tuple(float(p) for p in args.proportions.split(","))
        except ValueError:
            raise ConfigError(f"bad --proportions value: {args.proportions!r}") from None
    try:
        cfg = data.SynthConfig(
            n_samples=args.n,
            n_features=args.features,
            num_classes=args.classes,
            noise_sd=args.noise,
            imbalance=proportions,
            seed=args.seed,
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    dataset = data.generate_synthetic(cfg)
    data.save_csv(dataset, args.out)
    print(f"wrote {dataset.n} samples x {dataset.X.shape[1]} features to {args.out}")
    return 0


def _read_numeric_csv(path):
    """Numeric matrix from a CSV, skipping one header row when present."""
    try:
        with open(path, encoding="utf-8") as fh:
            lines = [ln for ln in fh.read().splitlines() if ln.strip()]
    except FileNotFoundError:
        raise DataError(f"file not found: {path}") from None
    if not lines:
        raise DataError(f"{path}: empty file")
    start = 0
    try:
        [float(v) for v in lines[0].split(",")]
    except ValueError:
        start = 1
    rows = []
    for i, line in enumerate(lines[start:], start=start + 1):
        try:
            rows.append([float(v) for v in line.split(",")])
        except ValueError as exc:
            raise DataError(f"{path}: line {i}: {exc}") from None
    return np.array(rows)


def _cmd_evaluate(args) -> int:
    truths = _read_numeric_csv(args.true_path)
    labels = truths[:, -1]
    if not np.all(labels == np.floor(labels)):
        raise DataError(f"{args.true_path}: last column must hold integer labels")
    y_true = labels.astype(np.int64)
    probs = _read_numeric_csv(args.proba_path)
    if probs.shape[0] != y_true.shape[0]:
        raise DataError(
            f"{args.proba_path}: {probs.shape[0]} rows, expected {y_true.shape[0]}"
        )
    if np.max(np.abs(probs.sum(axis=1) - 1.0)) > 1e-6:
        raise DataError(f"{args.proba_path}: rows must sum to 1")
    j = args.classes if args.classes is not None else probs.shape[1]
    report = metrics.metric_report(y_true, probs, num_classes=j)
    for key in metrics.REPORT_KEYS:
        print(f"{key}={report[key]!r}")
    return 0


def _cmd_list_methods(args) -> int:
    for cfg in registry.registry():
        grid = json.dumps(cfg.grid, sort_keys=True)
        print(f"{cfg.method}: grid={grid}")
    return 0


def _cmd_run(args) -> int:
    if args.jobs < 1:
        raise ConfigError("--jobs must be >= 1")
    config = harness.load_config(args.config)
    records, _ = harness.run_benchmark(config, args.out, jobs=args.jobs)
    failed = sum(1 for r in records if r.status != "ok")
    print(f"completed {len(records) - failed}/{len(records)} runs; results in {args.out}")
    return 0


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    handlers = {
        "generate-data": _cmd_generate_data,
        "evaluate": _cmd_evaluate,
        "list-methods": _cmd_list_methods,
        "run": _cmd_run,
    }
    try:
        return handlers[args.command](args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except (DataError, FileNotFoundError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001 - the CLI boundary maps to exit codes
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
