"""Typed columnar store for delimited tabular files.

A dataset is an immutable n x d table. Each column is classified as numeric
(float64 array + presence mask) or categorical (dictionary-encoded codes).
Missing cells are flagged, never dropped, so every column keeps exactly n
cells and row order is preserved end to end.
"""
from __future__ import annotations

import csv
import hashlib
import io
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import BinaryIO, Iterable, Optional, Sequence, Union

import numpy as np

NUMERIC_KIND = "numeric"
CATEGORICAL_KIND = "categorical"

# Cells equal to one of these (case-insensitive, after stripping) are missing.
MISSING_TOKENS = frozenset({"", "na", "nan"})

# A column is numeric iff at least this fraction of its non-missing cells
# parses as a finite real number.
NUMERIC_PARSE_THRESHOLD = 0.95


class DatasetError(Exception):
    """Base error for dataset construction and access."""


class IngestError(DatasetError):
    """Raised when a delimited source cannot be ingested."""


class EmptyColumnError(DatasetError):
    """Raised when a column has no non-missing cells."""


def _parse_numeric(cell: str) -> Optional[float]:
    """Parse a cell as a finite real number, or None if it is not one."""
    try:
        value = float(cell)
    except ValueError:
        return None
    if not math.isfinite(value):
        return None
    return value


def is_missing(cell: str) -> bool:
    return cell.strip().casefold() in MISSING_TOKENS


def infer_column_kind(cells: Sequence[str]) -> str:
    """Classify raw text cells as numeric or categorical.

    Numeric iff >= 95% of non-missing cells parse as finite reals; the
    remainder become missing on ingest. Raises EmptyColumnError when every
    cell is missing.
    """
    non_missing = [c for c in cells if not is_missing(c)]
    if not non_missing:
        raise EmptyColumnError("empty column")
    parsed = sum(1 for c in non_missing if _parse_numeric(c) is not None)
    if parsed >= NUMERIC_PARSE_THRESHOLD * len(non_missing):
        return NUMERIC_KIND
    return CATEGORICAL_KIND


@dataclass
class ColumnMeta:
    """Per-column metadata exposed to clients."""

    index: int
    name: str
    kind: str
    missing_count: int
    distinct_count: Optional[int] = None  # categorical columns only
    integer_valued: bool = False  # numeric column whose present cells are all integral

    def to_dict(self) -> dict:
        return {
            "index": self.index,
            "name": self.name,
            "kind": self.kind,
            "missing_count": self.missing_count,
            "distinct_count": self.distinct_count,
            "integer_valued": self.integer_valued,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ColumnMeta":
        return cls(
            index=d["index"],
            name=d["name"],
            kind=d["kind"],
            missing_count=d["missing_count"],
            distinct_count=d.get("distinct_count"),
            integer_valued=d.get("integer_valued", False),
        )


@dataclass
class NumericColumn:
    values: np.ndarray  # float64, length n; entries under a False mask are NaN
    mask: np.ndarray  # bool, True where a value is present

    def present(self) -> np.ndarray:
        """Non-missing values, in row order."""
        return self.values[self.mask]


@dataclass
class CategoricalColumn:
    codes: np.ndarray  # int32, length n; -1 marks missing
    categories: list  # dictionary in order of first appearance

    def present_codes(self) -> np.ndarray:
        return self.codes[self.codes >= 0]


@dataclass
class RowPredicate:
    """Single-column row filter.

    Supported ops: ``eq`` (value equality, categorical by string or numeric
    by parsed value), ``range`` (numeric, inclusive, either bound optional),
    and the numeric comparisons ``gt``/``ge``/``lt``/``le``.
    """

    column: int
    op: str
    value: object = None
    high: object = None  # upper bound for "range"

    OPS = ("eq", "range", "gt", "ge", "lt", "le")


@dataclass
class RowPage:
    columns: list  # projected column names
    rows: list  # list of row value lists; missing cells are None
    total: int  # rows matching the predicate, ignoring pagination
    offset: int
    limit: Optional[int]

    def to_dict(self) -> dict:
        return {
            "columns": self.columns,
            "rows": self.rows,
            "total": self.total,
            "offset": self.offset,
            "limit": self.limit,
        }


@dataclass
class IngestOptions:
    delimiter: str = ","
    has_header: bool = True


class Dataset:
    """Immutable columnar table with typed numeric/categorical columns."""

    def __init__(
        self,
        fingerprint: str,
        n: int,
        columns: list,
        numeric: dict,
        categorical: dict,
    ):
        self.fingerprint = fingerprint
        self.id = fingerprint[:16]
        self.n = n
        self.columns = columns
        self._numeric = numeric
        self._categorical = categorical

    @property
    def d(self) -> int:
        return len(self.columns)

    # -- access ------------------------------------------------------------

    def meta(self, index: int) -> ColumnMeta:
        if not 0 <= index < self.d:
            raise DatasetError(f"invalid column index {index}")
        return self.columns[index]

    def column_index(self, name: str) -> int:
        for meta in self.columns:
            if meta.name == name:
                return meta.index
        raise DatasetError(f"unknown column {name!r}")

    def numeric(self, index: int) -> NumericColumn:
        if index not in self._numeric:
            raise DatasetError(f"column {index} is not numeric")
        return self._numeric[index]

    def categorical(self, index: int) -> CategoricalColumn:
        if index not in self._categorical:
            raise DatasetError(f"column {index} is not categorical")
        return self._categorical[index]

    def numeric_indices(self) -> list:
        return [m.index for m in self.columns if m.kind == NUMERIC_KIND]

    def categorical_indices(self) -> list:
        return [m.index for m in self.columns if m.kind == CATEGORICAL_KIND]

    def cell(self, row: int, col: int):
        """Decoded cell value: float, str, or None when missing."""
        meta = self.meta(col)
        if meta.kind == NUMERIC_KIND:
            column = self._numeric[col]
            if not column.mask[row]:
                return None
            return float(column.values[row])
        column = self._categorical[col]
        code = int(column.codes[row])
        if code < 0:
            return None
        return column.categories[code]

    # -- row paging ---------------------------------------------------------

    def get_rows(
        self,
        predicate: Optional[RowPredicate] = None,
        projection: Optional[Sequence[int]] = None,
        limit: Optional[int] = None,
        offset: int = 0,
    ) -> RowPage:
        """Rows in stable original order, with pagination and one-column filters.

        Missing cells are rendered as None. ``total`` counts all matching
        rows regardless of limit/offset.
        """
        if projection is None:
            projection = [m.index for m in self.columns]
        else:
            projection = list(projection)
            for idx in projection:
                if not 0 <= idx < self.d:
                    raise DatasetError(f"invalid column index {idx}")
        if offset < 0:
            raise DatasetError("offset must be >= 0")
        if limit is not None and limit < 0:
            raise DatasetError("limit must be >= 0")

        keep = self._match(predicate)
        matching = np.flatnonzero(keep)
        total = int(matching.size)
        window = matching[offset:] if limit is None else matching[offset : offset + limit]

        rows = [[self.cell(int(r), c) for c in projection] for r in window]
        names = [self.columns[c].name for c in projection]
        return RowPage(columns=names, rows=rows, total=total, offset=offset, limit=limit)

    def _match(self, predicate: Optional[RowPredicate]) -> np.ndarray:
        if predicate is None:
            return np.ones(self.n, dtype=bool)
        if predicate.op not in RowPredicate.OPS:
            raise DatasetError(f"unknown predicate op {predicate.op!r}")
        meta = self.meta(predicate.column)

        if meta.kind == CATEGORICAL_KIND:
            if predicate.op != "eq":
                raise DatasetError("categorical columns support only the 'eq' predicate")
            column = self._categorical[predicate.column]
            target = str(predicate.value)
            if target not in column.categories:
                return np.zeros(self.n, dtype=bool)
            code = column.categories.index(target)
            return column.codes == code

        column = self._numeric[predicate.column]
        values, mask = column.values, column.mask
        if predicate.op == "eq":
            return mask & (values == _require_number(predicate.value))
        if predicate.op == "range":
            keep = mask.copy()
            if predicate.value is not None:
                keep &= values >= _require_number(predicate.value)
            if predicate.high is not None:
                keep &= values <= _require_number(predicate.high)
            return keep
        bound = _require_number(predicate.value)
        if predicate.op == "gt":
            return mask & (values > bound)
        if predicate.op == "ge":
            return mask & (values >= bound)
        if predicate.op == "lt":
            return mask & (values < bound)
        return mask & (values <= bound)

    # -- persistence ----------------------------------------------------------

    def save(self, directory: Union[str, Path]) -> None:
        directory = Path(directory)
        directory.mkdir(parents=True, exist_ok=True)
        arrays = {}
        categories = {}
        for idx, col in self._numeric.items():
            arrays[f"num{idx}_values"] = col.values
            arrays[f"num{idx}_mask"] = col.mask
        for idx, col in self._categorical.items():
            arrays[f"cat{idx}_codes"] = col.codes
            categories[str(idx)] = col.categories
        np.savez(directory / "columns.npz", **arrays)
        meta = {
            "fingerprint": self.fingerprint,
            "n": self.n,
            "columns": [m.to_dict() for m in self.columns],
            "categories": categories,
        }
        (directory / "meta.json").write_text(json.dumps(meta, indent=1))

    @classmethod
    def load(cls, directory: Union[str, Path]) -> "Dataset":
        directory = Path(directory)
        meta = json.loads((directory / "meta.json").read_text())
        with np.load(directory / "columns.npz") as arrays:
            numeric = {}
            categorical = {}
            for col_meta in meta["columns"]:
                idx = col_meta["index"]
                if col_meta["kind"] == NUMERIC_KIND:
                    numeric[idx] = NumericColumn(
                        values=arrays[f"num{idx}_values"],
                        mask=arrays[f"num{idx}_mask"],
                    )
                else:
                    categorical[idx] = CategoricalColumn(
                        codes=arrays[f"cat{idx}_codes"],
                        categories=list(meta["categories"][str(idx)]),
                    )
        return cls(
            fingerprint=meta["fingerprint"],
            n=meta["n"],
            columns=[ColumnMeta.from_dict(m) for m in meta["columns"]],
            numeric=numeric,
            categorical=categorical,
        )


def _require_number(value) -> float:
    if value is None:
        raise DatasetError("numeric predicate requires a value")
    try:
        return float(value)
    except (TypeError, ValueError):
        raise DatasetError(f"malformed numeric predicate value {value!r}") from None


def _fingerprint(raw: bytes, options: IngestOptions) -> str:
    h = hashlib.sha256()
    h.update(raw)
    h.update(b"\x00")
    h.update(options.delimiter.encode("utf-8"))
    h.update(b"\x01" if options.has_header else b"\x00")
    return h.hexdigest()


def ingest_csv(
    source: Union[bytes, BinaryIO],
    options: Optional[IngestOptions] = None,
) -> Dataset:
    """Ingest a delimited file into a typed columnar Dataset.

    The first row is treated as a header unless options say otherwise. Column
    kinds are inferred with the 95% numeric-parse rule; every row is retained
    and unparseable numeric cells become missing. Raises IngestError on
    unreadable input, inconsistent column counts, or zero data rows.
    """
    options = options or IngestOptions()
    raw = source if isinstance(source, bytes) else source.read()
    if not isinstance(raw, bytes):
        raise IngestError("source must yield bytes")
    try:
        text = raw.decode("utf-8-sig")
    except UnicodeDecodeError as exc:
        raise IngestError(f"source is not valid UTF-8: {exc}") from None

    reader = csv.reader(io.StringIO(text, newline=""), delimiter=options.delimiter)
    try:
        records = [row for row in reader if row]
    except csv.Error as exc:
        raise IngestError(f"malformed delimited input: {exc}") from None
    if options.has_header:
        if not records:
            raise IngestError("zero data rows")
        header, records = records[0], records[1:]
    else:
        header = None
    if not records:
        raise IngestError("zero data rows")

    width = len(records[0])
    for i, row in enumerate(records):
        if len(row) != width:
            raise IngestError(
                f"inconsistent column counts: row {i} has {len(row)} cells, expected {width}"
            )
    if header is not None:
        if len(header) != width:
            raise IngestError("header width does not match data rows")
        names = [h.strip() for h in header]
    else:
        names = [f"col{i}" for i in range(width)]
    if len(set(names)) != len(names):
        raise IngestError("duplicate column name")

    n = len(records)
    columns = []
    numeric = {}
    categorical = {}
    for j in range(width):
        cells = [records[i][j] for i in range(n)]
        missing = [is_missing(c) for c in cells]
        non_missing = [c for c, m in zip(cells, missing) if not m]
        if not non_missing:
            # Fully-missing columns stay numeric with an all-false mask.
            kind = NUMERIC_KIND
        else:
            kind = infer_column_kind(cells)

        if kind == NUMERIC_KIND:
            values = np.full(n, np.nan, dtype=np.float64)
            mask = np.zeros(n, dtype=bool)
            for i, (cell, miss) in enumerate(zip(cells, missing)):
                if miss:
                    continue
                parsed = _parse_numeric(cell)
                if parsed is None:
                    continue  # within the 5% tolerance; flagged missing
                values[i] = parsed
                mask[i] = True
            present = values[mask]
            integer_valued = bool(present.size) and bool(
                np.all(present == np.floor(present))
            )
            columns.append(
                ColumnMeta(
                    index=j,
                    name=names[j],
                    kind=NUMERIC_KIND,
                    missing_count=int(n - mask.sum()),
                    integer_valued=integer_valued,
                )
            )
            numeric[j] = NumericColumn(values=values, mask=mask)
        else:
            categories = []
            lookup = {}
            codes = np.full(n, -1, dtype=np.int32)
            for i, (cell, miss) in enumerate(zip(cells, missing)):
                if miss:
                    continue
                code = lookup.get(cell)
                if code is None:
                    code = len(categories)
                    lookup[cell] = code
                    categories.append(cell)
                codes[i] = code
            columns.append(
                ColumnMeta(
                    index=j,
                    name=names[j],
                    kind=CATEGORICAL_KIND,
                    missing_count=int((codes < 0).sum()),
                    distinct_count=len(categories),
                )
            )
            categorical[j] = CategoricalColumn(codes=codes, categories=categories)

    return Dataset(
        fingerprint=_fingerprint(raw, options),
        n=n,
        columns=columns,
        numeric=numeric,
        categorical=categorical,
    )
