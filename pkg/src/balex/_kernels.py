"""Hot numeric kernels with a numba fast path and a pure-numpy fallback.

The fallback is selected by setting the environment variable
``BALEX_NO_NUMBA=1`` before import (any value other than ``""``/``"0"``
disables JIT), or automatically when numba is unavailable.  Both paths
iterate size-K subsets in lexicographic order and break ties toward the
first maximum, so results are bit-identical.

All deviation arithmetic is integer-exact: for a subset B the kernel returns
``sum_z | count_z * R - |B|*D |``, the numerator of the statistical distance
over the common denominator ``2 * |B| * D * R``.  Callers form exact
Fractions from it.
"""

from __future__ import annotations

import itertools
import os

import numpy as np

_env = os.environ.get("BALEX_NO_NUMBA", "")
_numba_requested = _env in ("", "0")

if _numba_requested:
    try:
        from numba import njit

        HAVE_NUMBA = True
    except ImportError:  # pragma: no cover - numba is a declared dependency
        HAVE_NUMBA = False
else:
    HAVE_NUMBA = False

USING_NUMBA = HAVE_NUMBA


def deviation_numerator_np(rows: np.ndarray, r_size: int) -> int:
    """sum_z |count_z * R - E| for the edge multiset of the given rows."""
    edges = rows.size
    counts = np.bincount(rows.ravel(), minlength=r_size).astype(np.int64)
    return int(np.abs(counts * r_size - edges).sum())


def worst_subset_deviation_np(
    rows: np.ndarray, subset_size: int, r_size: int
) -> tuple[int, np.ndarray]:
    n_left = rows.shape[0]
    worst = -1
    best = None
    for combo in itertools.combinations(range(n_left), subset_size):
        idx = np.array(combo, dtype=np.int64)
        num = deviation_numerator_np(rows[idx], r_size)
        if num > worst:
            worst = num
            best = idx
    return worst, best


if USING_NUMBA:

    @njit(cache=True)
    def _deviation_numerator_jit(rows, r_size):  # pragma: no cover - jitted
        counts = np.zeros(r_size, dtype=np.int64)
        edges = 0
        for i in range(rows.shape[0]):
            for j in range(rows.shape[1]):
                counts[rows[i, j]] += 1
                edges += 1
        num = 0
        for z in range(r_size):
            v = counts[z] * r_size - edges
            num += v if v >= 0 else -v
        return num

    @njit(cache=True)
    def _worst_subset_deviation_jit(rows, subset_size, r_size):  # pragma: no cover
        n_left, deg = rows.shape
        edges = subset_size * deg
        counts = np.zeros(r_size, dtype=np.int64)
        idx = np.empty(subset_size, dtype=np.int64)
        best = np.empty(subset_size, dtype=np.int64)
        for i in range(subset_size):
            idx[i] = i
            best[i] = i
        worst = np.int64(-1)
        while True:
            for z in range(r_size):
                counts[z] = 0
            for i in range(subset_size):
                for j in range(deg):
                    counts[rows[idx[i], j]] += 1
            num = np.int64(0)
            for z in range(r_size):
                v = counts[z] * r_size - edges
                num += v if v >= 0 else -v
            if num > worst:
                worst = num
                for i in range(subset_size):
                    best[i] = idx[i]
            i = subset_size - 1
            while i >= 0 and idx[i] == n_left - subset_size + i:
                i -= 1
            if i < 0:
                break
            idx[i] += 1
            for j in range(i + 1, subset_size):
                idx[j] = idx[j - 1] + 1
        return worst, best

    def deviation_numerator_jit(rows: np.ndarray, r_size: int) -> int:
        return int(_deviation_numerator_jit(np.ascontiguousarray(rows), r_size))

    def worst_subset_deviation_jit(
        rows: np.ndarray, subset_size: int, r_size: int
    ) -> tuple[int, np.ndarray]:
        worst, best = _worst_subset_deviation_jit(
            np.ascontiguousarray(rows), subset_size, r_size
        )
        return int(worst), best

    deviation_numerator = deviation_numerator_jit
    worst_subset_deviation = worst_subset_deviation_jit
else:
    deviation_numerator_jit = None
    worst_subset_deviation_jit = None
    deviation_numerator = deviation_numerator_np
    worst_subset_deviation = worst_subset_deviation_np
