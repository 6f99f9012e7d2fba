"""Random hyperplane signatures for fast correlation estimates.

Each column gets a k-bit signature: bit j is the sign of the projection of
the mean-centered column onto a shared Gaussian direction g_j. The Hamming
distance H between two signatures estimates the angle between the columns,
so the correlation is recovered as cos(pi * H / k).

The Gaussian weight g[j][i] is drawn from a Philox stream keyed by
(seed, j) at position i, which makes weights a pure function of
(seed, j, i): no projection matrix is stored, all columns of a dataset
share the same hyperplanes, and builds are reproducible bit for bit.

Signatures also retain the raw projection sums (t = sum g*value over
present cells) and weight sums (u = sum g over present cells), so sketches
of disjoint row partitions merge by addition and the merged signature is
re-signed as sign(t - mean*u) once the global mean is known. Missing cells
contribute nothing to either sum. The merge contract is exact up to float
addition order: merged sums match a whole-data build to rounding, and the
signature bits match unless a centered projection is within rounding noise
of zero.
"""
from __future__ import annotations

import math
import struct
from dataclasses import dataclass
from typing import List, Optional, Sequence

import numpy as np

from ..descriptors import StrengthValue

# Rows of Gaussian weights are generated into a buffer of at most this many
# bytes before each matrix multiply.
_BLOCK_BYTES = 128 * 1024 * 1024


class IncomparableSketches(Exception):
    """Two hyperplane sketches were built with different (k, seed)."""


def gaussian_row(seed: int, j: int, n_rows: int, row_offset: int = 0) -> np.ndarray:
    """Weights g[j][row_offset : row_offset + n_rows] for hyperplane j."""
    gen = np.random.Generator(np.random.Philox(key=[seed & 0xFFFFFFFFFFFFFFFF, j]))
    return gen.standard_normal(row_offset + n_rows)[row_offset:]


@dataclass
class HyperplaneSketch:
    k: int
    seed: int
    n_rows: int
    mean: float  # column mean used to sign the bits
    bits: np.ndarray  # uint64, length k // 64
    proj: np.ndarray  # float64, length k: sum of g * value over present cells
    weight: np.ndarray  # float64, length k: sum of g over present cells

    def comparable(self, other: "HyperplaneSketch") -> bool:
        return self.k == other.k and self.seed == other.seed

    def hamming(self, other: "HyperplaneSketch") -> int:
        if not self.comparable(other):
            raise IncomparableSketches(
                f"incomparable sketches: (k={self.k}, seed={self.seed}) vs "
                f"(k={other.k}, seed={other.seed})"
            )
        return int(np.bitwise_count(self.bits ^ other.bits).sum())

    def resign(self, mean: float) -> None:
        """Recompute the signature for a new global mean (after merging)."""
        self.mean = float(mean)
        self.bits = _pack_signs(self.proj - self.mean * self.weight)

    def merge(self, other: "HyperplaneSketch", mean: float) -> "HyperplaneSketch":
        """Combine sketches of disjoint row partitions; sign with the global mean."""
        if not self.comparable(other):
            raise IncomparableSketches("incomparable sketches: differing k or seed")
        merged = HyperplaneSketch(
            k=self.k,
            seed=self.seed,
            n_rows=self.n_rows + other.n_rows,
            mean=float(mean),
            bits=np.empty(0, dtype=np.uint64),
            proj=self.proj + other.proj,
            weight=self.weight + other.weight,
        )
        merged.resign(mean)
        return merged

    def to_bytes(self) -> bytes:
        head = struct.pack("<IQqd", self.k, self.seed, self.n_rows, self.mean)
        return (
            head
            + self.bits.astype("<u8").tobytes()
            + self.proj.astype("<f8").tobytes()
            + self.weight.astype("<f8").tobytes()
        )

    @classmethod
    def from_bytes(cls, data: bytes) -> "HyperplaneSketch":
        k, seed, n_rows, mean = struct.unpack_from("<IQqd", data, 0)
        offset = struct.calcsize("<IQqd")
        words = k // 64
        bits = np.frombuffer(data, dtype="<u8", count=words, offset=offset).copy()
        offset += words * 8
        proj = np.frombuffer(data, dtype="<f8", count=k, offset=offset).copy()
        offset += k * 8
        weight = np.frombuffer(data, dtype="<f8", count=k, offset=offset).copy()
        return cls(k=k, seed=seed, n_rows=n_rows, mean=mean, bits=bits, proj=proj, weight=weight)


def _pack_signs(projections: np.ndarray) -> np.ndarray:
    signs = (projections >= 0.0).astype(np.uint8)
    return np.packbits(signs, bitorder="little").view("<u8").copy()


def build_hyperplane_sketches(
    values: np.ndarray,
    masks: Sequence[Optional[np.ndarray]],
    means: Sequence[float],
    k: int,
    seed: int,
    row_offset: int = 0,
) -> List[HyperplaneSketch]:
    """Signatures for the columns of an (n, d) matrix.

    ``values`` must already have missing cells zeroed; ``masks[c]`` is the
    presence mask for column c, or None when every cell is present.
    ``row_offset`` positions the rows inside a larger dataset so partition
    builds use the same hyperplane weights as a whole-data build.
    """
    if k < 64 or k % 64 != 0:
        raise ValueError("k must be a positive multiple of 64")
    values = np.asarray(values, dtype=np.float64)
    n, d = values.shape
    if len(masks) != d or len(means) != d:
        raise ValueError("masks and means must have one entry per column")

    # One shared weight column serves every fully-present data column.
    partial = [c for c in range(d) if masks[c] is not None]
    work = np.empty((n, d + 1 + len(partial)), dtype=np.float64)
    work[:, :d] = values
    work[:, d] = 1.0
    for slot, c in enumerate(partial):
        work[:, d + 1 + slot] = masks[c].astype(np.float64)

    t = np.empty((k, d), dtype=np.float64)
    u = np.empty((k, 1 + len(partial)), dtype=np.float64)
    block_j = max(1, min(k, _BLOCK_BYTES // (8 * max(n, 1))))
    buffer = np.empty((block_j, n), dtype=np.float64)
    for j0 in range(0, k, block_j):
        jb = min(block_j, k - j0)
        for j in range(j0, j0 + jb):
            buffer[j - j0] = gaussian_row(seed, j, n, row_offset)
        product = buffer[:jb] @ work
        t[j0 : j0 + jb] = product[:, :d]
        u[j0 : j0 + jb] = product[:, d:]

    sketches = []
    for c in range(d):
        if masks[c] is None:
            weight = u[:, 0].copy()
        else:
            weight = u[:, 1 + partial.index(c)].copy()
        sk = HyperplaneSketch(
            k=k,
            seed=seed,
            n_rows=n,
            mean=float(means[c]),
            bits=np.empty(0, dtype=np.uint64),
            proj=t[:, c].copy(),
            weight=weight,
        )
        sk.resign(means[c])
        sketches.append(sk)
    return sketches


def approx_pearson(sk_x: HyperplaneSketch, sk_y: HyperplaneSketch) -> StrengthValue:
    """Correlation estimate cos(pi * H / k) from two signatures."""
    hamming = sk_x.hamming(sk_y)  # raises IncomparableSketches on mismatch
    estimate = math.cos(math.pi * hamming / sk_x.k)
    return StrengthValue(
        raw=estimate,
        strength=abs(estimate),
        auxiliary={"hamming": hamming, "k": sk_x.k, "approximate": True},
    )
