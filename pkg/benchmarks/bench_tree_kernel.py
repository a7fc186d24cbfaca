"""Compare the compiled and pure-Python tree kernels.

Run with ``python benchmarks/bench_tree_kernel.py``. Each case grows trees on
seeded random data with both backends, checks that the node arrays agree
exactly, and reports the median wall time of each.
"""

import argparse
import statistics
import time

import numpy as np

from autoflow import _tree_py
from autoflow.tree_kernel import GINI, MSE, compiled_backend

CASES = [
    # (label, n_rows, n_features, criterion, max_features, random_split)
    ("cart gini 500x8", 500, 8, GINI, -1, False),
    ("forest tree 500x8 sqrt", 500, 8, GINI, 2, False),
    ("extra tree 500x8", 500, 8, GINI, 2, True),
    ("gbc regression depth3 2000x8", 2000, 8, MSE, -1, False),
    ("cart gini 5000x20", 5000, 20, GINI, -1, False),
]


def _data(n, d, criterion, seed):
    rng = np.random.default_rng(seed)
    X = rng.normal(size=(n, d)).round(2)
    logits = X[:, 0] - 0.5 * X[:, 1] + rng.normal(scale=1.0, size=n)
    y = (logits > 0).astype(np.float64) if criterion == GINI else logits
    return X, y, np.ones(n)


def _time(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return statistics.median(times), out


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)
    compiled = compiled_backend()
    if compiled is None:
        print("compiled extension not built; only the Python kernel is timed")
    print(f"{'case':32s} {'python (s)':>11s} {'cython (s)':>11s} {'speedup':>8s}  identical")
    for label, n, d, crit, mf, rs in CASES:
        X, y, w = _data(n, d, crit, 7)
        depth = 3 if crit == MSE else -1

        def run(mod):
            return mod.grow_tree(X, y, w, crit, depth, 2, mf, rs, 11)

        tp, tree_py = _time(lambda: run(_tree_py), args.repeat)
        if compiled is None:
            print(f"{label:32s} {tp:11.4f} {'-':>11s} {'-':>8s}  -")
            continue
        tc, tree_c = _time(lambda: run(compiled), args.repeat)
        same = all(np.array_equal(a, b) for a, b in zip(tree_py, tree_c))
        print(f"{label:32s} {tp:11.4f} {tc:11.4f} {tp / tc:7.1f}x  {same}")


if __name__ == "__main__":
    main()
