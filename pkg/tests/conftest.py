from __future__ import annotations

import io
from typing import Dict, Sequence

import numpy as np
import pytest

from guidepost.dataset import Dataset, IngestOptions, ingest_csv


def make_csv(columns: Dict[str, Sequence], delimiter: str = ",") -> bytes:
    """Render named columns (None -> empty cell) as CSV bytes."""
    names = list(columns)
    n = len(next(iter(columns.values()))) if columns else 0
    buf = io.StringIO()
    buf.write(delimiter.join(names) + "\n")
    for i in range(n):
        cells = []
        for name in names:
            v = columns[name][i]
            cells.append("" if v is None else str(v))
        buf.write(delimiter.join(cells) + "\n")
    return buf.getvalue().encode("utf-8")


def ingest_columns(columns: Dict[str, Sequence], **options) -> Dataset:
    return ingest_csv(make_csv(columns), IngestOptions(**options) if options else None)


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240817)


@pytest.fixture
def mixed_dataset(rng) -> Dataset:
    """Four numeric + one categorical column with planted structure."""
    n = 800
    base = rng.normal(0.0, 1.0, n)
    columns = {
        "base": base,
        "tracks_base": 2.0 * base + rng.normal(0.0, 0.1, n),
        "noise": rng.normal(5.0, 2.0, n),
        "heavy": rng.standard_t(2.5, n),
        "label": rng.choice(["red", "green", "blue"], n, p=[0.7, 0.2, 0.1]),
    }
    return ingest_columns(columns)
