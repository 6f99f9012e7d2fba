"""Misra-Gries heavy-hitters sketch over integer keys.

With capacity s the sketch undercounts: every reported count lies in
[true - n/s, true], and any key whose true frequency exceeds n/s is
guaranteed to be present. Keys are integers; categorical columns use their
dictionary codes and integer-valued numeric columns use the values
themselves.
"""
from __future__ import annotations

import struct
from typing import Dict, Iterable, Tuple

import numpy as np


class HeavyHittersSketch:
    def __init__(self, capacity: int):
        if capacity < 1:
            raise ValueError("capacity must be >= 1")
        self.capacity = capacity
        self.n = 0
        self.counters: Dict[int, int] = {}
        self.error_bound = 0  # max undercount of any reported count

    # -- construction ------------------------------------------------------------

    @classmethod
    def from_counts(cls, keys: np.ndarray, counts: np.ndarray, capacity: int) -> "HeavyHittersSketch":
        """Summarize exact per-key counts; exact when distinct <= capacity."""
        sk = cls(capacity)
        keys = np.asarray(keys, dtype=np.int64)
        counts = np.asarray(counts, dtype=np.int64)
        sk.n = int(counts.sum())
        order = np.lexsort((keys, -counts))  # count desc, key asc
        if keys.size <= capacity:
            sk.counters = {int(keys[i]): int(counts[i]) for i in order}
            return sk
        lam = int(counts[order[capacity]])
        sk.error_bound = lam
        for i in order[:capacity]:
            kept = int(counts[i]) - lam
            if kept > 0:
                sk.counters[int(keys[i])] = kept
        return sk

    def update(self, key: int) -> None:
        """Classic streaming Misra-Gries step."""
        key = int(key)
        self.n += 1
        counters = self.counters
        if key in counters:
            counters[key] += 1
            return
        if len(counters) < self.capacity:
            counters[key] = 1
            return
        self.error_bound += 1
        dead = []
        for k in counters:
            counters[k] -= 1
            if counters[k] == 0:
                dead.append(k)
        for k in dead:
            del counters[k]

    def extend(self, keys: Iterable[int]) -> None:
        for key in keys:
            self.update(key)

    # -- queries ---------------------------------------------------------------

    def estimate(self, key: int) -> int:
        return self.counters.get(int(key), 0)

    def items(self) -> Iterable[Tuple[int, int]]:
        """(key, count) pairs by descending count, key ascending on ties."""
        return sorted(self.counters.items(), key=lambda kv: (-kv[1], kv[0]))

    def tracked_mass(self) -> int:
        return sum(self.counters.values())

    # -- merging ---------------------------------------------------------------

    def merge(self, other: "HeavyHittersSketch") -> "HeavyHittersSketch":
        if self.capacity != other.capacity:
            raise ValueError("cannot merge heavy-hitter sketches with different capacity")
        merged = HeavyHittersSketch(self.capacity)
        merged.n = self.n + other.n
        combined = dict(self.counters)
        for key, count in other.counters.items():
            combined[key] = combined.get(key, 0) + count
        lam = 0
        if len(combined) > self.capacity:
            by_count = sorted(combined.values(), reverse=True)
            lam = by_count[self.capacity]
        merged.error_bound = self.error_bound + other.error_bound + lam
        for key, count in combined.items():
            kept = count - lam
            if kept > 0:
                merged.counters[key] = kept
        return merged

    # -- serialization -----------------------------------------------------------

    def to_bytes(self) -> bytes:
        head = struct.pack("<IqqI", self.capacity, self.n, self.error_bound, len(self.counters))
        body = b"".join(struct.pack("<qq", k, c) for k, c in self.items())
        return head + body

    @classmethod
    def from_bytes(cls, data: bytes) -> "HeavyHittersSketch":
        capacity, n, error_bound, count = struct.unpack_from("<IqqI", data, 0)
        sk = cls(capacity)
        sk.n = n
        sk.error_bound = error_bound
        offset = struct.calcsize("<IqqI")
        step = struct.calcsize("<qq")
        for _ in range(count):
            k, c = struct.unpack_from("<qq", data, offset)
            sk.counters[k] = c
            offset += step
        return sk
