from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from guidepost.rowhash import lowest_priority_rows, row_priorities
from guidepost.sketch.reservoir import ReservoirSample


def test_small_input_keeps_everything(rng):
    rows = np.array([4, 1, 9])
    vals = np.array([0.4, 0.1, 0.9])
    sk = ReservoirSample.from_column(rows, vals, capacity=10, seed=7)
    assert sk.rows.tolist() == [1, 4, 9]  # stored in row order
    assert sk.values.tolist() == [0.1, 0.4, 0.9]
    assert sk.seen == 3


def test_selection_matches_hash_rule(rng):
    n = 5000
    rows = np.arange(n, dtype=np.int64)
    vals = rng.normal(size=n)
    sk = ReservoirSample.from_column(rows, vals, capacity=100, seed=42)
    expected = np.sort(lowest_priority_rows(rows.astype(np.uint64), 42, 100))
    np.testing.assert_array_equal(sk.rows, expected)
    np.testing.assert_array_equal(sk.values, vals[sk.rows])
    assert sk.seen == n


def test_columns_sample_identical_rows(rng):
    # The priority depends only on (seed, row), so two columns of the same
    # dataset select the same rows and scatter pairs stay aligned.
    n = 3000
    rows = np.arange(n, dtype=np.int64)
    a = ReservoirSample.from_column(rows, rng.normal(size=n), capacity=64, seed=9)
    b = ReservoirSample.from_column(rows, rng.uniform(size=n), capacity=64, seed=9)
    np.testing.assert_array_equal(a.rows, b.rows)


def test_different_seeds_select_differently(rng):
    n = 3000
    rows = np.arange(n, dtype=np.int64)
    vals = rng.normal(size=n)
    a = ReservoirSample.from_column(rows, vals, capacity=64, seed=1)
    b = ReservoirSample.from_column(rows, vals, capacity=64, seed=2)
    assert a.rows.tolist() != b.rows.tolist()


def test_extend_equals_one_shot(rng):
    n = 4000
    rows = np.arange(n, dtype=np.int64)
    vals = rng.normal(size=n)
    whole = ReservoirSample.from_column(rows, vals, capacity=128, seed=5)
    sk = ReservoirSample(capacity=128, seed=5)
    for chunk in np.array_split(np.arange(n), 7):
        sk.extend(rows[chunk], vals[chunk])
    np.testing.assert_array_equal(sk.rows, whole.rows)
    np.testing.assert_array_equal(sk.values, whole.values)
    assert sk.seen == whole.seen == n


def test_merge_equals_whole(rng):
    n = 4000
    rows = np.arange(n, dtype=np.int64)
    vals = rng.normal(size=n)
    whole = ReservoirSample.from_column(rows, vals, capacity=128, seed=5)
    half = n // 2
    left = ReservoirSample.from_column(rows[:half], vals[:half], capacity=128, seed=5)
    right = ReservoirSample.from_column(rows[half:], vals[half:], capacity=128, seed=5)
    merged = left.merge(right)
    np.testing.assert_array_equal(merged.rows, whole.rows)
    np.testing.assert_array_equal(merged.values, whole.values)
    assert merged.seen == n


def test_merge_config_mismatch_rejected():
    with pytest.raises(ValueError):
        ReservoirSample(10, seed=1).merge(ReservoirSample(10, seed=2))
    with pytest.raises(ValueError):
        ReservoirSample(10, seed=1).merge(ReservoirSample(20, seed=1))


def test_capacity_validation():
    with pytest.raises(ValueError):
        ReservoirSample(0, seed=1)


def test_value_counts(rng):
    rows = np.arange(6, dtype=np.int64)
    sk = ReservoirSample.from_column(
        rows, np.array([1.0, 2.0, 1.0, 3.0, 2.0, 1.0]), capacity=10, seed=0
    )
    values, counts = sk.value_counts()
    assert values.tolist() == [1.0, 2.0, 3.0]
    assert counts.tolist() == [3, 2, 1]


def test_serialization_round_trip(rng):
    sk = ReservoirSample.from_column(
        np.arange(1000, dtype=np.int64), rng.normal(size=1000), capacity=50, seed=3
    )
    back = ReservoirSample.from_bytes(sk.to_bytes())
    assert back.capacity == sk.capacity
    assert back.seed == sk.seed
    assert back.seen == sk.seen
    np.testing.assert_array_equal(back.rows, sk.rows)
    np.testing.assert_array_equal(back.values, sk.values)
    assert back.to_bytes() == sk.to_bytes()


def test_priorities_are_deterministic():
    rows = np.arange(100, dtype=np.uint64)
    np.testing.assert_array_equal(row_priorities(rows, 42), row_priorities(rows, 42))
    assert row_priorities(rows, 42).dtype == np.uint64


def test_sample_is_roughly_uniform(rng):
    # Select 500 of 10_000 rows; membership counts per decile should be flat.
    n, k = 10_000, 500
    rows = np.arange(n, dtype=np.int64)
    sk = ReservoirSample.from_column(rows, np.zeros(n), capacity=k, seed=11)
    decile_counts = np.histogram(sk.rows, bins=10, range=(0, n))[0]
    assert decile_counts.sum() == k
    # Expected 50 per decile; allow a generous spread.
    assert decile_counts.min() > 20 and decile_counts.max() < 90


@given(
    n=st.integers(min_value=1, max_value=300),
    capacity=st.integers(min_value=1, max_value=50),
    seed=st.integers(min_value=0, max_value=2**32 - 1),
    cut_fraction=st.floats(min_value=0.0, max_value=1.0),
)
@settings(max_examples=60, deadline=None)
def test_merge_equals_whole_property(n, capacity, seed, cut_fraction):
    rows = np.arange(n, dtype=np.int64)
    vals = rows.astype(np.float64) * 0.5
    cut = int(n * cut_fraction)
    whole = ReservoirSample.from_column(rows, vals, capacity, seed)
    merged = ReservoirSample.from_column(rows[:cut], vals[:cut], capacity, seed).merge(
        ReservoirSample.from_column(rows[cut:], vals[cut:], capacity, seed)
    )
    np.testing.assert_array_equal(merged.rows, whole.rows)
    np.testing.assert_array_equal(merged.values, whole.values)
