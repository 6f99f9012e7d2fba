"""Per-dataset sketch bundles: build, merge, and binary round-trip.

A bundle holds every sketch needed to rank guideposts approximately:
moments, quantiles, a reservoir sample, and a hyperplane signature for
each numeric column; heavy hitters and a reservoir for each categorical
column (and for integer-valued numeric columns, whose values double as
category codes). Bundles built on disjoint, adjacent row ranges merge
into the bundle of the union, so large datasets can be sketched in
partitions.
"""
from __future__ import annotations

import struct
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np

from ..dataset import CATEGORICAL_KIND, NUMERIC_KIND, Dataset
from .heavy_hitters import HeavyHittersSketch
from .hyperplane import HyperplaneSketch, build_hyperplane_sketches
from .moments import MomentSketch
from .quantile import QuantileSketch
from .reservoir import ReservoirSample

_MAGIC = b"GPSK"
_VERSION = 1
_CONFIG_FMT = "<IdIIQI"


class BundleError(Exception):
    pass


@dataclass(frozen=True)
class SketchConfig:
    hyperplane_bits: int = 1024
    quantile_epsilon: float = 0.005
    heavy_hitter_capacity: int = 256
    reservoir_capacity: int = 4096
    seed: int = 42
    cardinality_cap: int = 10000

    def __post_init__(self) -> None:
        if self.hyperplane_bits < 64 or self.hyperplane_bits % 64 != 0:
            raise ValueError("hyperplane_bits must be a positive multiple of 64")
        if not (0.0 < self.quantile_epsilon <= 0.1):
            raise ValueError("quantile_epsilon must lie in (0, 0.1]")
        if self.heavy_hitter_capacity < 1 or self.reservoir_capacity < 1:
            raise ValueError("sketch capacities must be positive")
        if self.cardinality_cap < 1:
            raise ValueError("cardinality_cap must be positive")

    def to_bytes(self) -> bytes:
        return struct.pack(
            _CONFIG_FMT,
            self.hyperplane_bits,
            self.quantile_epsilon,
            self.heavy_hitter_capacity,
            self.reservoir_capacity,
            self.seed,
            self.cardinality_cap,
        )

    @classmethod
    def from_bytes(cls, data: bytes) -> "SketchConfig":
        bits, eps, heavy, res, seed, cap = struct.unpack(_CONFIG_FMT, data)
        return cls(bits, eps, heavy, res, seed, cap)


@dataclass
class ColumnSketches:
    name: str
    kind: str
    integer_valued: bool
    missing_count: int
    n_present: int
    distinct: Optional[int]  # exact category count, None when above the cap
    moments: Optional[MomentSketch] = None
    quantile: Optional[QuantileSketch] = None
    reservoir: Optional[ReservoirSample] = None
    hyperplane: Optional[HyperplaneSketch] = None
    heavy: Optional[HeavyHittersSketch] = None
    labels: Dict[int, str] = field(default_factory=dict)


def build_bundle(
    dataset: Dataset,
    config: Optional[SketchConfig] = None,
    row_range: Optional[Tuple[int, int]] = None,
) -> "SketchBundle":
    config = config or SketchConfig()
    start, end = row_range if row_range is not None else (0, dataset.n)
    if not (0 <= start <= end <= dataset.n):
        raise BundleError(f"row range [{start}, {end}) outside dataset of {dataset.n} rows")
    rows = np.arange(start, end, dtype=np.int64)

    numeric_idx = dataset.numeric_indices()
    columns: List[Optional[ColumnSketches]] = [None] * len(dataset.columns)

    # Numeric hyperplane signatures are built in one pass: every column
    # shares the same Gaussian rows, so one matrix multiply covers them all.
    # Empty and constant columns are left out (a constant column never
    # enters a correlation pair, so its signature would be dead weight).
    eligible = []
    for idx in numeric_idx:
        col = dataset.numeric(idx)
        present = col.values[start:end][col.mask[start:end]]
        if present.size and present.min() != present.max():
            eligible.append(idx)
    hyperplanes: Dict[int, HyperplaneSketch] = {}
    if eligible:
        n_slice = end - start
        matrix = np.zeros((n_slice, len(eligible)), dtype=np.float64)
        masks: List[Optional[np.ndarray]] = []
        means: List[float] = []
        for pos, idx in enumerate(eligible):
            col = dataset.numeric(idx)
            vals = col.values[start:end]
            mask = col.mask[start:end]
            matrix[:, pos] = np.where(mask, vals, 0.0)
            masks.append(None if mask.all() else mask)
            means.append(float(vals[mask].mean()))
        built = build_hyperplane_sketches(
            matrix, masks, means, config.hyperplane_bits, config.seed, row_offset=start
        )
        hyperplanes = dict(zip(eligible, built))

    for idx in numeric_idx:
        meta = dataset.meta(idx)
        col = dataset.numeric(idx)
        mask = col.mask[start:end]
        present = col.values[start:end][mask]
        present_rows = rows[mask]
        if present.size == 0:
            # All cells missing in this range: the entry exists but carries
            # no sketches.
            columns[idx] = ColumnSketches(
                name=meta.name,
                kind=NUMERIC_KIND,
                integer_valued=meta.integer_valued,
                missing_count=int((~mask).sum()),
                n_present=0,
                distinct=None,
            )
            continue
        heavy = None
        if meta.integer_valued:
            keys, counts = np.unique(present.astype(np.int64), return_counts=True)
            heavy = HeavyHittersSketch.from_counts(keys, counts, config.heavy_hitter_capacity)
        columns[idx] = ColumnSketches(
            name=meta.name,
            kind=NUMERIC_KIND,
            integer_valued=meta.integer_valued,
            missing_count=int((~mask).sum()),
            n_present=int(present.size),
            distinct=None,
            moments=MomentSketch.from_values(present),
            quantile=QuantileSketch.from_sorted(np.sort(present), config.quantile_epsilon),
            reservoir=ReservoirSample.from_column(
                present_rows, present, config.reservoir_capacity, config.seed
            ),
            hyperplane=hyperplanes.get(idx),
            heavy=heavy,
        )

    for idx in dataset.categorical_indices():
        meta = dataset.meta(idx)
        col = dataset.categorical(idx)
        codes = col.codes[start:end]
        mask = codes >= 0
        present = codes[mask].astype(np.int64)
        keys, counts = np.unique(present, return_counts=True)
        heavy = HeavyHittersSketch.from_counts(keys, counts, config.heavy_hitter_capacity)
        distinct = meta.distinct_count
        if distinct is not None and distinct > config.cardinality_cap:
            distinct = None
        columns[idx] = ColumnSketches(
            name=meta.name,
            kind=CATEGORICAL_KIND,
            integer_valued=False,
            missing_count=int((~mask).sum()),
            n_present=int(present.size),
            distinct=distinct,
            reservoir=ReservoirSample.from_column(
                rows[mask], present.astype(np.float64), config.reservoir_capacity, config.seed
            ),
            heavy=heavy,
            labels={int(code): col.categories[int(code)] for code in heavy.counters},
        )

    assert all(c is not None for c in columns)
    return SketchBundle(
        fingerprint=dataset.fingerprint,
        config=config,
        n_rows=dataset.n,
        row_start=start,
        row_end=end,
        columns=columns,
    )


@dataclass
class SketchBundle:
    fingerprint: str
    config: SketchConfig
    n_rows: int
    row_start: int
    row_end: int
    columns: List[ColumnSketches]

    def column(self, name: str) -> ColumnSketches:
        for col in self.columns:
            if col.name == name:
                return col
        raise KeyError(name)

    # -- serialization ----------------------------------------------------

    def to_bytes(self) -> bytes:
        parts = [
            _MAGIC,
            struct.pack("<H", _VERSION),
            self.config.to_bytes(),
            _pack_str(self.fingerprint),
            struct.pack("<QQQI", self.n_rows, self.row_start, self.row_end, len(self.columns)),
        ]
        for col in self.columns:
            parts.append(_pack_column(col))
        return b"".join(parts)

    @classmethod
    def from_bytes(cls, data: bytes) -> "SketchBundle":
        if data[:4] != _MAGIC:
            raise BundleError("not a sketch bundle")
        (version,) = struct.unpack_from("<H", data, 4)
        if version != _VERSION:
            raise BundleError(f"unsupported bundle version {version}")
        offset = 6
        config = SketchConfig.from_bytes(data[offset : offset + struct.calcsize(_CONFIG_FMT)])
        offset += struct.calcsize(_CONFIG_FMT)
        fingerprint, offset = _unpack_str(data, offset)
        n_rows, row_start, row_end, n_cols = struct.unpack_from("<QQQI", data, offset)
        offset += struct.calcsize("<QQQI")
        columns = []
        for _ in range(n_cols):
            col, offset = _unpack_column(data, offset)
            columns.append(col)
        return cls(
            fingerprint=fingerprint,
            config=config,
            n_rows=n_rows,
            row_start=row_start,
            row_end=row_end,
            columns=columns,
        )

    def save(self, path) -> None:
        with open(path, "wb") as fh:
            fh.write(self.to_bytes())

    @classmethod
    def load(cls, path) -> "SketchBundle":
        with open(path, "rb") as fh:
            return cls.from_bytes(fh.read())


def merge_bundles(a: SketchBundle, b: SketchBundle) -> SketchBundle:
    """Combine bundles built on adjacent row ranges of the same dataset."""
    if a.fingerprint != b.fingerprint:
        raise BundleError("bundles describe different datasets")
    if a.config != b.config:
        raise BundleError("bundles were built with different sketch configs")
    if a.row_start > b.row_start:
        a, b = b, a
    if a.row_end != b.row_start:
        raise BundleError(
            f"bundle row ranges [{a.row_start}, {a.row_end}) and "
            f"[{b.row_start}, {b.row_end}) are not adjacent"
        )
    if len(a.columns) != len(b.columns):
        raise BundleError("bundles have different column sets")

    merged_cols = []
    for ca, cb in zip(a.columns, b.columns):
        if ca.name != cb.name or ca.kind != cb.kind:
            raise BundleError("bundles have different column sets")
        merged_cols.append(_merge_column(ca, cb))
    return SketchBundle(
        fingerprint=a.fingerprint,
        config=a.config,
        n_rows=a.n_rows,
        row_start=a.row_start,
        row_end=b.row_end,
        columns=merged_cols,
    )


def _merge_column(ca: ColumnSketches, cb: ColumnSketches) -> ColumnSketches:
    moments = ca.moments.merge(cb.moments) if ca.moments and cb.moments else None
    quantile = ca.quantile.merge(cb.quantile) if ca.quantile and cb.quantile else None
    reservoir = ca.reservoir.merge(cb.reservoir) if ca.reservoir and cb.reservoir else None
    heavy = ca.heavy.merge(cb.heavy) if ca.heavy and cb.heavy else (ca.heavy or cb.heavy)
    hyperplane = None
    if ca.hyperplane and cb.hyperplane:
        if moments and moments.n > 0:
            global_mean = moments.s1 / moments.n
        else:
            global_mean = 0.0
        hyperplane = ca.hyperplane.merge(cb.hyperplane, global_mean)
    distinct = ca.distinct if ca.distinct is not None else cb.distinct
    if ca.distinct is not None and cb.distinct is not None:
        distinct = max(ca.distinct, cb.distinct)
    return ColumnSketches(
        name=ca.name,
        kind=ca.kind,
        integer_valued=ca.integer_valued and cb.integer_valued,
        missing_count=ca.missing_count + cb.missing_count,
        n_present=ca.n_present + cb.n_present,
        distinct=distinct,
        moments=moments,
        quantile=quantile,
        reservoir=reservoir,
        hyperplane=hyperplane,
        heavy=heavy,
        labels={**ca.labels, **cb.labels},
    )


# -- wire helpers ---------------------------------------------------------


def _pack_str(s: str) -> bytes:
    raw = s.encode("utf-8")
    return struct.pack("<H", len(raw)) + raw


def _unpack_str(data: bytes, offset: int) -> Tuple[str, int]:
    (length,) = struct.unpack_from("<H", data, offset)
    offset += 2
    return data[offset : offset + length].decode("utf-8"), offset + length


def _pack_blob(blob: Optional[bytes]) -> bytes:
    if blob is None:
        return struct.pack("<I", 0xFFFFFFFF)
    return struct.pack("<I", len(blob)) + blob


def _unpack_blob(data: bytes, offset: int) -> Tuple[Optional[bytes], int]:
    (length,) = struct.unpack_from("<I", data, offset)
    offset += 4
    if length == 0xFFFFFFFF:
        return None, offset
    return data[offset : offset + length], offset + length


def _pack_column(col: ColumnSketches) -> bytes:
    parts = [
        _pack_str(col.name),
        struct.pack(
            "<BBQQq",
            0 if col.kind == NUMERIC_KIND else 1,
            1 if col.integer_valued else 0,
            col.missing_count,
            col.n_present,
            -1 if col.distinct is None else col.distinct,
        ),
        _pack_blob(col.moments.to_bytes() if col.moments else None),
        _pack_blob(col.quantile.to_bytes() if col.quantile else None),
        _pack_blob(col.reservoir.to_bytes() if col.reservoir else None),
        _pack_blob(col.hyperplane.to_bytes() if col.hyperplane else None),
        _pack_blob(col.heavy.to_bytes() if col.heavy else None),
        struct.pack("<I", len(col.labels)),
    ]
    for code in sorted(col.labels):
        parts.append(struct.pack("<q", code))
        parts.append(_pack_str(col.labels[code]))
    return b"".join(parts)


def _unpack_column(data: bytes, offset: int) -> Tuple[ColumnSketches, int]:
    name, offset = _unpack_str(data, offset)
    kind_code, int_flag, missing, n_present, distinct = struct.unpack_from("<BBQQq", data, offset)
    offset += struct.calcsize("<BBQQq")
    blobs = []
    for _ in range(5):
        blob, offset = _unpack_blob(data, offset)
        blobs.append(blob)
    (n_labels,) = struct.unpack_from("<I", data, offset)
    offset += 4
    labels: Dict[int, str] = {}
    for _ in range(n_labels):
        (code,) = struct.unpack_from("<q", data, offset)
        offset += 8
        label, offset = _unpack_str(data, offset)
        labels[code] = label
    col = ColumnSketches(
        name=name,
        kind=NUMERIC_KIND if kind_code == 0 else CATEGORICAL_KIND,
        integer_valued=bool(int_flag),
        missing_count=missing,
        n_present=n_present,
        distinct=None if distinct < 0 else distinct,
        moments=MomentSketch.from_bytes(blobs[0]) if blobs[0] is not None else None,
        quantile=QuantileSketch.from_bytes(blobs[1]) if blobs[1] is not None else None,
        reservoir=ReservoirSample.from_bytes(blobs[2]) if blobs[2] is not None else None,
        hyperplane=HyperplaneSketch.from_bytes(blobs[3]) if blobs[3] is not None else None,
        heavy=HeavyHittersSketch.from_bytes(blobs[4]) if blobs[4] is not None else None,
        labels=labels,
    )
    return col, offset
