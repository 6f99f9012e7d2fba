"""Uniform without-replacement row sample with exact mergeability.

Selection keeps the rows with the lowest seeded hash priorities (see
guidepost.rowhash). Because the priority of a row depends only on (seed,
row index), all columns of a dataset sample the same rows, and merging two
disjoint partitions' samples by re-selecting the lowest priorities equals
the whole-data sample exactly.
"""
from __future__ import annotations

import struct
from typing import Optional

import numpy as np

from ..rowhash import row_priorities


class ReservoirSample:
    def __init__(self, capacity: int, seed: int):
        if capacity < 1:
            raise ValueError("capacity must be >= 1")
        self.capacity = capacity
        self.seed = seed
        self.seen = 0
        self.rows = np.empty(0, dtype=np.int64)
        self.values = np.empty(0, dtype=np.float64)

    @classmethod
    def from_column(
        cls,
        rows: np.ndarray,
        values: np.ndarray,
        capacity: int,
        seed: int,
    ) -> "ReservoirSample":
        """Sample up to capacity of the given (row, value) pairs."""
        sk = cls(capacity, seed)
        rows = np.asarray(rows, dtype=np.int64)
        values = np.asarray(values, dtype=np.float64)
        if rows.size != values.size:
            raise ValueError("rows and values must align")
        sk.seen = int(rows.size)
        if rows.size <= capacity:
            order = np.argsort(rows)
        else:
            pri = row_priorities(rows.astype(np.uint64), seed)
            keep = np.argpartition(pri, capacity)[:capacity]
            order = keep[np.argsort(rows[keep])]
        sk.rows = rows[order].copy()
        sk.values = values[order].copy()
        return sk

    def extend(self, rows: np.ndarray, values: np.ndarray) -> None:
        """Feed another batch; bounded memory, same result as one-shot build."""
        combined_rows = np.concatenate([self.rows, np.asarray(rows, dtype=np.int64)])
        combined_values = np.concatenate([self.values, np.asarray(values, dtype=np.float64)])
        seen = self.seen + int(np.asarray(rows).size)
        refreshed = ReservoirSample.from_column(
            combined_rows, combined_values, self.capacity, self.seed
        )
        self.rows, self.values = refreshed.rows, refreshed.values
        self.seen = seen

    def merge(self, other: "ReservoirSample") -> "ReservoirSample":
        """Exact merge of samples over disjoint row sets."""
        if self.capacity != other.capacity or self.seed != other.seed:
            raise ValueError("cannot merge reservoirs with different capacity or seed")
        merged = ReservoirSample.from_column(
            np.concatenate([self.rows, other.rows]),
            np.concatenate([self.values, other.values]),
            self.capacity,
            self.seed,
        )
        merged.seen = self.seen + other.seen
        return merged

    def value_counts(self):
        """Distinct sampled values and their counts, as parallel arrays."""
        return np.unique(self.values, return_counts=True)

    def to_bytes(self) -> bytes:
        head = struct.pack("<IQqI", self.capacity, self.seed, self.seen, self.rows.size)
        return head + self.rows.astype("<i8").tobytes() + self.values.astype("<f8").tobytes()

    @classmethod
    def from_bytes(cls, data: bytes) -> "ReservoirSample":
        capacity, seed, seen, size = struct.unpack_from("<IQqI", data, 0)
        sk = cls(capacity, seed)
        sk.seen = seen
        offset = struct.calcsize("<IQqI")
        sk.rows = np.frombuffer(data, dtype="<i8", count=size, offset=offset).copy()
        offset += size * 8
        sk.values = np.frombuffer(data, dtype="<f8", count=size, offset=offset).copy()
        return sk
