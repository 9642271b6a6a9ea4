#!/usr/bin/env python3
"""Benchmark the JIT kernels against the pure-numpy fallback.

The two paths compute identical results (asserted below); this script only
compares wall time.  Run as:

    python benchmarks/bench_kernels.py [--repeats N]

Setting BALEX_NO_NUMBA=1 in the environment makes the whole package use the
numpy path; here both implementations are imported explicitly so a single run
compares them side by side.
"""

import argparse
import time

import numpy as np

from balex import _kernels, sample_table


def bench(fn, *args, repeats: int) -> float:
    fn(*args)  # warm-up (and JIT compile on the numba path)
    t0 = time.perf_counter()
    for _ in range(repeats):
        fn(*args)
    return (time.perf_counter() - t0) / repeats


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--repeats", type=int, default=20)
    args = parser.parse_args()

    if not _kernels.USING_NUMBA:
        print("numba unavailable or disabled; nothing to compare")
        return

    cases = [
        ("subset sweep n=4 d=3 k=2 (C(16,4)=1820)", 4, 3, 2),
        ("subset sweep n=4 d=3 k=3 (C(16,8)=12870)", 4, 3, 3),
        ("subset sweep n=5 d=2 k=1 (C(32,2)=496)", 5, 2, 1),
    ]
    print(f"{'case':<45} {'numba':>10} {'numpy':>10} {'speedup':>8}")
    for label, n, d, k in cases:
        graph = sample_table(n, d, n, seed=0)
        rows = graph.prefix_view(k).prefixed_rows()
        subset, r_size = 1 << k, 1 << k
        jit_worst, jit_best = _kernels.worst_subset_deviation_jit(rows, subset, r_size)
        np_worst, np_best = _kernels.worst_subset_deviation_np(rows, subset, r_size)
        assert jit_worst == np_worst and list(jit_best) == list(np_best)
        t_jit = bench(_kernels.worst_subset_deviation_jit, rows, subset, r_size,
                      repeats=args.repeats)
        t_np = bench(_kernels.worst_subset_deviation_np, rows, subset, r_size,
                     repeats=max(1, args.repeats // 4))
        print(f"{label:<45} {t_jit * 1e3:>8.2f}ms {t_np * 1e3:>8.2f}ms {t_np / t_jit:>7.1f}x")

    graph = sample_table(4, 9, 4, seed=0)
    rows = graph.prefix_view(2).prefixed_rows()
    members = np.arange(8, dtype=np.int64)
    sub = rows[members]
    assert _kernels.deviation_numerator_jit(sub, 4) == _kernels.deviation_numerator_np(sub, 4)
    t_jit = bench(_kernels.deviation_numerator_jit, sub, 4, repeats=args.repeats * 50)
    t_np = bench(_kernels.deviation_numerator_np, sub, 4, repeats=args.repeats * 50)
    label = "single-set deviation n=4 d=9 |B|=8"
    print(f"{label:<45} {t_jit * 1e6:>8.2f}us {t_np * 1e6:>8.2f}us {t_np / t_jit:>7.1f}x")


if __name__ == "__main__":
    main()
