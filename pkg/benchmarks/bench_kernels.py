#!/usr/bin/env python3
"""Benchmark the compiled kernels against the pure-Python fallback.

Times SGD training epochs and batch scoring on synthetic sparse data
shaped like real workloads (a few dozen active features per pair,
15 classes). Also verifies both backends produce identical results.

Usage: python benchmarks/bench_kernels.py [--rows 20000] [--epochs 3]
"""

import argparse
import time

import numpy as np

from protorel.kernels import pure

try:
    from protorel.kernels import _speedups
except ImportError:
    _speedups = None


def synthetic_csr(rng, n_rows, dim, nnz_lo=8, nnz_hi=20):
    indptr = np.zeros(n_rows + 1, dtype=np.int64)
    indices = []
    data = []
    for i in range(n_rows):
        k = int(rng.integers(nnz_lo, nnz_hi + 1))
        indices.extend(sorted(rng.choice(dim, size=k, replace=False).tolist()))
        data.extend([1.0] * k)
        indptr[i + 1] = len(indices)
    return indptr, np.asarray(indices, dtype=np.int64), np.asarray(data, dtype=np.float64)


def bench(label, fn):
    start = time.perf_counter()
    result = fn()
    elapsed = time.perf_counter() - start
    print(f"  {label:<12} {elapsed:>8.3f} s")
    return result, elapsed


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--rows", type=int, default=20000)
    parser.add_argument("--dim", type=int, default=2**18)
    parser.add_argument("--classes", type=int, default=15)
    parser.add_argument("--epochs", type=int, default=3)
    parser.add_argument("--seed", type=int, default=13)
    args = parser.parse_args()

    rng = np.random.default_rng(args.seed)
    indptr, indices, data = synthetic_csr(rng, args.rows, args.dim)
    y = rng.integers(0, args.classes, size=args.rows).astype(np.int64)
    orders = np.stack(
        [rng.permutation(args.rows) for _ in range(args.epochs)]
    ).astype(np.int64)

    print(
        f"sgd_epochs: rows={args.rows} classes={args.classes}"
        f" dim={args.dim} epochs={args.epochs}"
    )
    w_pure = np.zeros((args.classes, args.dim))
    (_, t_pure) = bench(
        "pure", lambda: pure.sgd_epochs(indptr, indices, data, y, w_pure, 0.1, orders)
    )
    if _speedups is not None:
        w_fast = np.zeros((args.classes, args.dim))
        (_, t_fast) = bench(
            "cython",
            lambda: _speedups.sgd_epochs(indptr, indices, data, y, w_fast, 0.1, orders),
        )
        same = np.array_equal(w_pure, w_fast)
        print(f"  identical results: {same}   speedup: {t_pure / t_fast:.1f}x")

    print(f"score_rows: rows={args.rows}")
    out_pure = np.empty((args.rows, args.classes))
    (_, t_pure) = bench(
        "pure", lambda: pure.score_rows(indptr, indices, data, w_pure, out_pure)
    )
    if _speedups is not None:
        out_fast = np.empty((args.rows, args.classes))
        (_, t_fast) = bench(
            "cython", lambda: _speedups.score_rows(indptr, indices, data, w_pure, out_fast)
        )
        same = np.array_equal(out_pure, out_fast)
        print(f"  identical results: {same}   speedup: {t_pure / t_fast:.1f}x")
    if _speedups is None:
        print("compiled extension not built; only the fallback was timed")


if __name__ == "__main__":
    main()
