"""Deterministic per-row priorities shared by all row-sampling paths.

A seeded 64-bit mix (splitmix64 finalizer) maps each row index to a unique
priority. Keeping the lowest-priority rows is a uniform without-replacement
sample, every column of a dataset selects the same rows (so bivariate
samples align), and samples from disjoint row partitions merge exactly by
re-selecting the lowest priorities of the union.
"""
from __future__ import annotations

import numpy as np

_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)
_GOLDEN = np.uint64(0x9E3779B97F4A7C15)


def row_priorities(rows: np.ndarray, seed: int) -> np.ndarray:
    """Priority of each row index under the given seed; a bijection per seed."""
    with np.errstate(over="ignore"):
        z = np.asarray(rows, dtype=np.uint64) + _GOLDEN * np.uint64(seed & 0xFFFFFFFFFFFFFFFF)
        z = (z ^ (z >> np.uint64(30))) * _MIX1
        z = (z ^ (z >> np.uint64(27))) * _MIX2
        z = z ^ (z >> np.uint64(31))
    return z


def lowest_priority_rows(rows: np.ndarray, seed: int, k: int) -> np.ndarray:
    """The k rows with the smallest priorities, returned in row order."""
    rows = np.asarray(rows, dtype=np.int64)
    if rows.size <= k:
        return np.sort(rows)
    pri = row_priorities(rows.astype(np.uint64), seed)
    keep = np.argpartition(pri, k)[:k]
    return np.sort(rows[keep])
