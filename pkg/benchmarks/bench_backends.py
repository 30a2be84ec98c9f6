"""Time the numba loop kernels against their vectorized numpy twins.

Covers every dual-implementation kernel at training-step shapes plus an
end-to-end model fit under each backend. Run from the repo root:

    python benchmarks/bench_backends.py [--big] [--repeats 7]
"""

import argparse
import time

import numpy as np

from ordinet import backend, data, kernels, losses, nn_core as nn, soft_labels as sl


def best_of(fn, args, repeats, number):
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        for _ in range(number):
            fn(*args)
        best = min(best, (time.perf_counter() - t0) / number)
    return best


def kernel_cases(n, j):
    rng = np.random.default_rng(0)
    logits = rng.normal(size=(n, j))
    targets = rng.dirichlet(np.ones(j), size=n)
    probs = rng.dirichlet(np.ones(j), size=n)
    labels = rng.integers(0, j, size=n)
    idx = np.arange(j, dtype=np.float64)
    omega = np.abs(idx[:, None] - idx[None, :]) ** 2 / (j - 1) ** 2
    sb_logits = rng.normal(size=(n, j - 1))
    upstream = rng.normal(size=(n, j))
    projection = rng.normal(size=n)
    thresholds = np.sort(rng.normal(size=j - 1))
    return [
        ("softmax_xent", (logits, targets)),
        ("xent_on_probs", (probs, targets)),
        ("wk_value_grad", (probs, labels, omega, 1e-9)),
        ("sb_forward", (sb_logits,)),
        ("sb_backward", (sb_logits, upstream)),
        ("clm_forward", (projection, thresholds, 0)),
        ("clm_backward", (projection, thresholds, 0, upstream)),
    ]


def bench_kernels(n, j, repeats, number):
    print(f"\nkernels at batch={n}, classes={j} (best of {repeats} x {number} calls)")
    print(f"{'kernel':<16} {'numpy':>12} {'numba':>12} {'speedup':>9}")
    for name, args in kernel_cases(n, j):
        np_fn = kernels._NUMPY_IMPLS[name]
        nb_fn = kernels._NUMBA_IMPLS[name]
        nb_fn(*args)  # trigger compilation outside the timed region
        t_np = best_of(np_fn, args, repeats, number)
        t_nb = best_of(nb_fn, args, repeats, number)
        print(f"{name:<16} {t_np * 1e6:>10.1f}us {t_nb * 1e6:>10.1f}us {t_np / t_nb:>8.1f}x")


def bench_end_to_end(repeats):
    ds = data.generate_synthetic(data.SynthConfig(2000, 10, 5, noise_sd=0.5, seed=0))
    train, test = data.stratified_split(ds, 0.25, seed=0)
    train, val = data.stratified_split(train, 0.15, seed=0)
    train, val, test = data.standardize(train, val, test)
    loss = losses.SoftCE(sl.onehot_table(5), 0.0)
    config = nn.TrainConfig(learning_rate=1e-2, max_epochs=30, patience=30, seed=0)

    print(f"\nend-to-end fit (softmax head, 30 epochs, N={train.n}; best of {repeats})")
    results = {}
    for name in ("numpy", "numba"):
        kernels.set_backend(name)
        best = float("inf")
        for _ in range(repeats):
            model = nn.build_model(nn.ModelSpec(10, (32,), 5), 0)
            t0 = time.perf_counter()
            nn.fit(model, train.X, train.y, val.X, val.y, config, loss)
            best = min(best, time.perf_counter() - t0)
        results[name] = best
        print(f"{name:<8} {best:.3f}s")
    print(f"speedup {results['numpy'] / results['numba']:.2f}x")


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--big", action="store_true", help="also time batch=4096, classes=10")
    parser.add_argument("--repeats", type=int, default=7)
    args = parser.parse_args()

    if not backend.HAVE_NUMBA:
        raise SystemExit("numba is not importable; nothing to compare")

    original = kernels.active_backend()
    try:
        bench_kernels(128, 5, args.repeats, 2000)
        if args.big:
            bench_kernels(4096, 10, args.repeats, 100)
        bench_end_to_end(max(3, args.repeats // 2))
    finally:
        kernels.set_backend(original)


if __name__ == "__main__":
    main()
