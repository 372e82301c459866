"""Time the compiled kernels against the NumPy fallback.

Runs the batched loss/gradient kernels and a full training loop under every
importable backend and prints a timing table.

Usage: python benchmarks/bench_backends.py [--batch 4096] [--classes 10] [--repeat 50]
"""

import argparse
import time

import numpy as np

from wcce.backend import available_backends


def time_kernels(kern, batch, classes, repeat, rng):
    z = rng.normal(size=(batch, classes))
    w = rng.uniform(0.0, 1.0, size=(batch, classes))
    y = rng.integers(0, classes, batch)
    timings = {}
    for name, fn, args in [
        ("softmax", kern.softmax, (z,)),
        ("wcce_loss", kern.wcce_loss, (w, None)),
        ("wcce_grad", kern.wcce_grad, (w, None)),
        ("cce_loss", kern.cce_loss, (None, y)),
        ("cce_grad", kern.cce_grad, (None, y)),
    ]:
        probs = kern.softmax(z)
        call_args = tuple(probs if a is None else a for a in args)
        fn(*call_args)  # warm up
        start = time.perf_counter()
        for _ in range(repeat):
            fn(*call_args)
        timings[name] = (time.perf_counter() - start) / repeat
    return timings


def time_training(backend_name, seed=0):
    import importlib
    import os

    os.environ["WCCE_BACKEND"] = backend_name
    import wcce.backend
    importlib.reload(wcce.backend)
    import wcce.trainer
    importlib.reload(wcce.trainer)
    from wcce import weights

    names = tuple(f"c{i}" for i in range(5))
    centers = [(3 * i, 3 * ((i * 7) % 5)) for i in range(5)]
    data = wcce.trainer.generate_synthetic(5, 400, 2, centers, 1.5, seed, names)
    matrix = weights.identity(names)
    cfg = wcce.trainer.TrainConfig(learning_rate=0.1, epochs=30, batch_size=32, seed=seed)
    start = time.perf_counter()
    wcce.trainer.train(data, matrix, cfg)
    return time.perf_counter() - start


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--batch", type=int, default=4096)
    parser.add_argument("--classes", type=int, default=10)
    parser.add_argument("--repeat", type=int, default=50)
    args = parser.parse_args()

    backends = available_backends()
    rng = np.random.default_rng(0)
    results = {name: time_kernels(kern, args.batch, args.classes, args.repeat, rng)
               for name, kern in backends.items()}

    kernels = ["softmax", "wcce_loss", "wcce_grad", "cce_loss", "cce_grad"]
    header = f"{'kernel':<12}" + "".join(f"{name:>14}" for name in results)
    print(f"batch={args.batch} classes={args.classes} repeat={args.repeat}")
    print(header)
    print("-" * len(header))
    for k in kernels:
        row = f"{k:<12}"
        for name in results:
            row += f"{results[name][k] * 1e6:>12.1f}us"
        print(row)

    print()
    for name in backends:
        elapsed = time_training(name)
        print(f"train 30 epochs x 2000 samples [{name:>8}]: {elapsed:.3f}s")


if __name__ == "__main__":
    main()
