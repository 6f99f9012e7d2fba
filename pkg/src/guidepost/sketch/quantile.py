"""Greenwald-Khanna style quantile summary with a deterministic rank bound.

The summary is a sorted list of tuples (value, g, delta) where g is the gap
in minimum rank to the previous tuple and delta bounds the rank
uncertainty. Maintaining g + delta <= floor(2*eps*n) guarantees every
quantile query lands within eps*n of the target rank. (The maintenance cap
floors at 1, so for streams small enough that eps*n < 1 the effective
rank error bound is one rank.) The first tuple is always the exact minimum
and the last the exact maximum, so q=0 and q=1 are answered exactly.

Merging concatenates the two summaries in value order and inflates each
tuple's delta by the local rank uncertainty of the other summary, which
keeps the invariant (and hence the eps*n query bound) valid on the union.
"""
from __future__ import annotations

import struct
from bisect import bisect_right
from typing import List, Tuple

import numpy as np

Entry = Tuple[float, int, int]  # (value, g, delta)


class QuantileSketch:
    def __init__(self, epsilon: float = 0.005):
        if not 0.0 < epsilon <= 0.1:
            raise ValueError("epsilon must be in (0, 0.1]")
        self.epsilon = epsilon
        self.n = 0
        self.entries: List[Entry] = []
        self._period = max(1, int(1.0 / (2.0 * epsilon)))
        self._pending = 0

    # -- construction ----------------------------------------------------------

    @classmethod
    def from_sorted(cls, sorted_values: np.ndarray, epsilon: float = 0.005) -> "QuantileSketch":
        """Build directly from sorted data with exact anchor ranks (delta=0)."""
        sk = cls(epsilon)
        values = np.asarray(sorted_values, dtype=np.float64)
        n = int(values.size)
        if n == 0:
            return sk
        step = max(1, int(2.0 * epsilon * n))
        anchors = list(range(0, n, step))
        if anchors[-1] != n - 1:
            anchors.append(n - 1)
        entries: List[Entry] = []
        prev_rank = 0
        for idx in anchors:
            rank = idx + 1
            entries.append((float(values[idx]), rank - prev_rank, 0))
            prev_rank = rank
        sk.entries = entries
        sk.n = n
        return sk

    def insert(self, value: float) -> None:
        """Streaming insert with periodic compression."""
        value = float(value)
        self.n += 1
        if not self.entries:
            self.entries.append((value, 1, 0))
            return
        pos = bisect_right(self.entries, value, key=lambda e: e[0])
        if pos == 0 or pos == len(self.entries):
            entry: Entry = (value, 1, 0)  # new extreme: rank known exactly
        else:
            entry = (value, 1, max(0, self._cap() - 1))
        self.entries.insert(pos, entry)
        self._pending += 1
        if self._pending >= self._period:
            self._compress()
            self._pending = 0

    def extend(self, values: np.ndarray) -> None:
        for v in np.asarray(values, dtype=np.float64):
            self.insert(float(v))

    def _cap(self) -> int:
        return max(1, int(2.0 * self.epsilon * self.n))

    def _compress(self) -> None:
        cap = self._cap()
        entries = self.entries
        i = len(entries) - 2
        # Never touch index 0 (exact minimum); the last tuple only absorbs.
        while i >= 1:
            v, g, d = entries[i]
            v2, g2, d2 = entries[i + 1]
            if g + g2 + d2 <= cap:
                entries[i + 1] = (v2, g + g2, d2)
                del entries[i]
            i -= 1

    # -- queries ---------------------------------------------------------------

    def quantile(self, q: float) -> float:
        """A value whose true rank is within eps*n of q*n; exact at q=0 and q=1."""
        if not self.entries:
            raise ValueError("empty quantile sketch")
        if q <= 0.0:
            return self.entries[0][0]
        if q >= 1.0:
            return self.entries[-1][0]
        target = q * self.n
        err = self.epsilon * self.n
        best = self.entries[0][0]
        r_min = 0
        for value, g, delta in self.entries:
            r_min += g
            if r_min + delta <= target + err:
                best = value
            else:
                break
        return best

    def _rank_bounds(self, value: float, strict: bool) -> Tuple[float, float]:
        entries = self.entries
        r_min = 0
        last_le = 0  # r_min of the last entry passing the comparison
        found = False
        next_spread = 0
        for v, g, delta in entries:
            passes = (v < value) if strict else (v <= value)
            if passes:
                r_min += g
                last_le = r_min
                found = True
            else:
                next_spread = g + delta
                break
        if not found:
            return 0.0, 0.0
        if next_spread == 0:  # ran past the last entry
            return float(last_le), float(self.n)
        return float(last_le), float(last_le + next_spread - 1)

    def rank_le(self, value: float) -> float:
        """Approximate count of stream values <= value (error <= eps*n)."""
        if not self.entries:
            raise ValueError("empty quantile sketch")
        if value < self.entries[0][0]:
            return 0.0
        if value >= self.entries[-1][0]:
            return float(self.n)
        lo, hi = self._rank_bounds(value, strict=False)
        return (lo + hi) / 2.0

    def rank_lt(self, value: float) -> float:
        """Approximate count of stream values < value (error <= eps*n)."""
        if not self.entries:
            raise ValueError("empty quantile sketch")
        if value <= self.entries[0][0]:
            return 0.0
        if value > self.entries[-1][0]:
            return float(self.n)
        lo, hi = self._rank_bounds(value, strict=True)
        return (lo + hi) / 2.0

    # -- merging ---------------------------------------------------------------

    def merge(self, other: "QuantileSketch") -> "QuantileSketch":
        if self.epsilon != other.epsilon:
            raise ValueError("cannot merge quantile sketches with different epsilon")
        if other.n == 0:
            return self._copy()
        if self.n == 0:
            return other._copy()

        def inflate(src: "QuantileSketch", other_entries: List[Entry], side: int):
            # Tag entries with (value, side) so the interleave order is fixed,
            # and widen delta by the other summary's local gap uncertainty.
            out = []
            values = [e[0] for e in other_entries]
            for v, g, d in src.entries:
                j = bisect_right(values, v)
                if j < len(other_entries):
                    _, og, od = other_entries[j]
                    d = d + og + od - 1
                out.append((v, side, g, d))
            return out

        tagged = inflate(self, other.entries, 0) + inflate(other, self.entries, 1)
        tagged.sort(key=lambda e: (e[0], e[1]))
        merged = QuantileSketch(self.epsilon)
        merged.entries = [(v, g, d) for v, _side, g, d in tagged]
        merged.n = self.n + other.n
        merged._compress()
        return merged

    def _copy(self) -> "QuantileSketch":
        sk = QuantileSketch(self.epsilon)
        sk.n = self.n
        sk.entries = list(self.entries)
        return sk

    # -- serialization -----------------------------------------------------------

    def to_bytes(self) -> bytes:
        head = struct.pack("<dqI", self.epsilon, self.n, len(self.entries))
        body = b"".join(struct.pack("<dqq", v, g, d) for v, g, d in self.entries)
        return head + body

    @classmethod
    def from_bytes(cls, data: bytes) -> "QuantileSketch":
        epsilon, n, count = struct.unpack_from("<dqI", data, 0)
        sk = cls(epsilon)
        sk.n = n
        offset = struct.calcsize("<dqI")
        step = struct.calcsize("<dqq")
        entries = []
        for _ in range(count):
            v, g, d = struct.unpack_from("<dqq", data, offset)
            entries.append((v, g, d))
            offset += step
        sk.entries = entries
        return sk
