"""Running-sum moment sketch: count plus the first four power sums.

Power sums are accumulated with math.fsum, which returns the correctly
rounded value of the exact sum, so builds are deterministic and merges of
exactly representable data reproduce the whole-data sketch bit for bit.
Reconstructing central moments from power sums loses digits when the mean
dwarfs the spread; that cancellation bounds the accuracy of the derived
skewness and kurtosis.
"""
from __future__ import annotations

import math
import struct
from dataclasses import dataclass
from typing import Optional

import numpy as np


@dataclass
class MomentSketch:
    n: int = 0
    s1: float = 0.0
    s2: float = 0.0
    s3: float = 0.0
    s4: float = 0.0

    @classmethod
    def from_values(cls, values: np.ndarray) -> "MomentSketch":
        values = np.asarray(values, dtype=np.float64)
        if values.size == 0:
            return cls()
        v2 = values * values
        return cls(
            n=int(values.size),
            s1=math.fsum(values),
            s2=math.fsum(v2),
            s3=math.fsum(v2 * values),
            s4=math.fsum(v2 * v2),
        )

    def merge(self, other: "MomentSketch") -> "MomentSketch":
        """Component-wise sum; by definition exact."""
        return MomentSketch(
            n=self.n + other.n,
            s1=self.s1 + other.s1,
            s2=self.s2 + other.s2,
            s3=self.s3 + other.s3,
            s4=self.s4 + other.s4,
        )

    # -- serialization -------------------------------------------------------

    _FORMAT = "<qdddd"

    def to_bytes(self) -> bytes:
        return struct.pack(self._FORMAT, self.n, self.s1, self.s2, self.s3, self.s4)

    @classmethod
    def from_bytes(cls, data: bytes) -> "MomentSketch":
        n, s1, s2, s3, s4 = struct.unpack(cls._FORMAT, data)
        return cls(n=n, s1=s1, s2=s2, s3=s3, s4=s4)


@dataclass
class MomentMetrics:
    n: int
    mean: float
    std: float  # population standard deviation
    skewness: Optional[float]  # None when std == 0
    kurtosis: Optional[float]


def moments_to_metrics(sketch: MomentSketch) -> MomentMetrics:
    """Central-moment metrics reconstructed from the raw power sums."""
    if sketch.n < 1:
        raise ValueError("empty moment sketch")
    n = float(sketch.n)
    mu = sketch.s1 / n
    m2 = (sketch.s2 - mu * sketch.s1) / n
    if m2 <= 0.0:
        return MomentMetrics(n=sketch.n, mean=mu, std=0.0, skewness=None, kurtosis=None)
    m3 = (sketch.s3 - 3.0 * mu * sketch.s2 + 2.0 * mu * mu * sketch.s1) / n
    m4 = (
        sketch.s4
        - 4.0 * mu * sketch.s3
        + 6.0 * mu * mu * sketch.s2
        - 3.0 * mu**3 * sketch.s1
    ) / n
    m4 = max(m4, 0.0)
    std = math.sqrt(m2)
    return MomentMetrics(
        n=sketch.n,
        mean=mu,
        std=std,
        skewness=m3 / (std**3),
        kurtosis=m4 / (m2 * m2),
    )
