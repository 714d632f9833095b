#!/usr/bin/env python3
"""Benchmark the jitted kernels against their pure-numpy fallbacks.

Runs each kernel on realistic workloads in both implementations and prints
a throughput table. The numpy fallback is the exact code used when
``AMPKIT_NO_NUMBA=1`` is set; the numba path is what normal runs use.

Usage: python benchmarks/bench_kernels.py [--repeat 5]
"""

import argparse
import time

import numpy as np

from ampkit import _kernels


def best_of(fn, args, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn(*args)
        times.append(time.perf_counter() - t0)
    return min(times)


def bench_alias_pick(gen, repeat):
    k, n = 40000, 10 ** 6
    raw = gen.random(k)
    probs = raw / raw.sum()
    prob = np.minimum(probs * k, 1.0)
    alias = gen.integers(0, k, k)
    u1, u2 = gen.random(n), gen.random(n)
    args = (prob, alias, u1, u2)
    rows = [("alias_pick numpy", n, best_of(_kernels._alias_pick_np, args,
                                            repeat))]
    if _kernels.HAVE_NUMBA:
        _kernels._alias_pick_jit(*args)  # compile outside the timer
        rows.append(("alias_pick numba", n,
                     best_of(_kernels._alias_pick_jit, args, repeat)))
    return rows


def bench_unique_counts(gen, repeat):
    trials, n, k = 20000, 100, 400
    labels = gen.integers(0, k, size=(trials, n))
    args = (labels, k)
    items = trials * n
    rows = [("unique_count_rows numpy", items,
             best_of(_kernels._unique_count_rows_np, args, repeat))]
    if _kernels.HAVE_NUMBA:
        _kernels._unique_count_rows_jit(*args)
        rows.append(("unique_count_rows numba", items,
                     best_of(_kernels._unique_count_rows_jit, args, repeat)))
    return rows


def bench_duplicates(gen, repeat):
    trials, n, k = 50000, 30, 10 ** 4
    labels = gen.integers(0, k, size=(trials, n))
    args = (labels, k)
    items = trials * n
    rows = [("has_duplicate_rows numpy", items,
             best_of(_kernels._has_duplicate_rows_np, args, repeat))]
    if _kernels.HAVE_NUMBA:
        _kernels._has_duplicate_rows_jit(*args)
        rows.append(("has_duplicate_rows numba", items,
                     best_of(_kernels._has_duplicate_rows_jit, args, repeat)))
    return rows


def bench_compound_law(repeat):
    n, extra, p = 2000, 60, 0.37
    items = (n + 1) * (extra + 1)
    rows = [("compound_law numpy", items,
             best_of(_kernels._compound_law_np, (n, extra, p), repeat))]
    if _kernels.HAVE_NUMBA:
        _kernels._compound_law_jit(n, extra, p)
        rows.append(("compound_law numba", items,
                     best_of(_kernels._compound_law_jit, (n, extra, p),
                             repeat)))
    return rows


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args()
    gen = np.random.default_rng(0)

    print(f"active implementation: {_kernels.IMPLEMENTATION} "
          f"(AMPKIT_NO_NUMBA toggles the fallback)\n")
    rows = []
    rows += bench_alias_pick(gen, args.repeat)
    rows += bench_unique_counts(gen, args.repeat)
    rows += bench_duplicates(gen, args.repeat)
    rows += bench_compound_law(args.repeat)

    width = max(len(name) for name, _, _ in rows)
    print(f"{'kernel':<{width}}  {'items':>12}  {'best time':>10}  {'items/s':>12}")
    for name, items, secs in rows:
        print(f"{name:<{width}}  {items:>12,}  {secs:>9.4f}s  {items / secs:>12,.0f}")


if __name__ == "__main__":
    main()
