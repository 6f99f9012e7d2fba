from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from guidepost.sketch.quantile import QuantileSketch

import oracles


def true_rank_le(stream, value) -> int:
    return int(np.sum(np.asarray(stream) <= value))


def true_rank_lt(stream, value) -> int:
    return int(np.sum(np.asarray(stream) < value))


def assert_rank_contract(sk: QuantileSketch, stream: np.ndarray):
    """Every quantile answer and rank estimate is within max(1, eps*n) of
    the truth; the floor of one rank covers tiny streams where eps*n < 1."""
    n = stream.size
    tol = max(1.0, sk.epsilon * n) + 1e-9
    s = np.sort(stream)
    for q in (0.0, 0.01, 0.1, 0.25, 0.5, 0.75, 0.9, 0.99, 1.0):
        got = sk.quantile(q)
        # Rank of the answer must lie within eps*n of the target rank q*n.
        lo, hi = oracles.rank_interval(stream.tolist(), got)
        target = q * n
        assert lo - tol <= target <= hi + tol, (q, got, lo, hi, target)
    probe_points = np.concatenate([s[:: max(1, n // 17)], [s[0] - 1, s[-1] + 1]])
    for v in probe_points:
        assert abs(sk.rank_le(v) - true_rank_le(stream, v)) <= tol
        assert abs(sk.rank_lt(v) - true_rank_lt(stream, v)) <= tol


def assert_invariant(sk: QuantileSketch):
    """Summary invariant: g + delta <= max(1, floor(2*eps*n)); ranks total n."""
    if not sk.entries:
        assert sk.n == 0
        return
    cap = max(1, int(2.0 * sk.epsilon * sk.n))
    assert all(g + d <= cap for _, g, d in sk.entries)
    assert sum(g for _, g, _ in sk.entries) == sk.n
    values = [v for v, _, _ in sk.entries]
    assert values == sorted(values)


def adversarial_streams(rng):
    n = 5000
    yield np.arange(n, dtype=np.float64)  # sorted
    yield np.arange(n, dtype=np.float64)[::-1].copy()  # reverse sorted
    yield np.repeat(np.arange(50.0), n // 50)  # heavy duplicate blocks
    yield rng.standard_t(2.0, n)  # heavy tails
    yield np.concatenate([np.zeros(n // 2), rng.normal(1e6, 1.0, n // 2)])  # bimodal
    zipf = rng.zipf(1.5, n).astype(np.float64)
    yield zipf  # discrete, skewed
    sawtooth = np.tile(np.arange(100.0), n // 100)
    yield sawtooth  # periodic inserts


def test_from_sorted_rank_contract(rng):
    for stream in adversarial_streams(rng):
        sk = QuantileSketch.from_sorted(np.sort(stream), epsilon=0.01)
        assert sk.n == stream.size
        assert_invariant(sk)
        assert_rank_contract(sk, stream)


def test_streaming_rank_contract(rng):
    for stream in adversarial_streams(rng):
        sk = QuantileSketch(epsilon=0.02)
        sk.extend(stream)
        assert_invariant(sk)
        assert_rank_contract(sk, stream)


def test_streaming_summary_stays_compact(rng):
    sk = QuantileSketch(epsilon=0.01)
    sk.extend(rng.normal(size=20_000))
    # GK summaries hold O(log(eps*n)/eps) tuples; 10/eps is a roomy ceiling.
    assert len(sk.entries) <= 10 / sk.epsilon


def test_extremes_are_exact(rng):
    stream = rng.normal(size=3000)
    for sk in (
        QuantileSketch.from_sorted(np.sort(stream), epsilon=0.05),
        QuantileSketch(epsilon=0.05),
    ):
        if sk.n == 0:
            sk.extend(stream)
        assert sk.quantile(0.0) == stream.min()
        assert sk.quantile(1.0) == stream.max()
        assert sk.rank_le(stream.max()) == stream.size
        assert sk.rank_lt(stream.min()) == 0.0


def test_merge_preserves_rank_contract(rng):
    stream = np.concatenate(
        [rng.normal(0, 1, 4000), rng.normal(100, 5, 2000), rng.uniform(-50, 50, 3000)]
    )
    parts = np.array_split(stream, 5)
    sketches = [QuantileSketch.from_sorted(np.sort(p), epsilon=0.01) for p in parts]
    merged = sketches[0]
    for sk in sketches[1:]:
        merged = merged.merge(sk)
    assert merged.n == stream.size
    assert_invariant(merged)
    assert_rank_contract(merged, stream)


def test_merge_empty_is_identity(rng):
    sk = QuantileSketch.from_sorted(np.sort(rng.normal(size=100)), epsilon=0.01)
    empty = QuantileSketch(epsilon=0.01)
    assert sk.merge(empty).entries == sk.entries
    assert empty.merge(sk).entries == sk.entries


def test_merge_epsilon_mismatch_rejected():
    with pytest.raises(ValueError):
        QuantileSketch(epsilon=0.01).merge(QuantileSketch(epsilon=0.02))


def test_epsilon_validation():
    with pytest.raises(ValueError):
        QuantileSketch(epsilon=0.0)
    with pytest.raises(ValueError):
        QuantileSketch(epsilon=0.2)


def test_empty_sketch_queries_raise():
    sk = QuantileSketch()
    with pytest.raises(ValueError):
        sk.quantile(0.5)
    with pytest.raises(ValueError):
        sk.rank_le(0.0)


def test_serialization_round_trip(rng):
    sk = QuantileSketch.from_sorted(np.sort(rng.normal(size=5000)), epsilon=0.005)
    back = QuantileSketch.from_bytes(sk.to_bytes())
    assert back.epsilon == sk.epsilon
    assert back.n == sk.n
    assert back.entries == sk.entries
    assert back.to_bytes() == sk.to_bytes()


@given(
    values=st.lists(
        st.floats(allow_nan=False, allow_infinity=False, min_value=-1e9, max_value=1e9),
        min_size=1,
        max_size=400,
    ),
    epsilon=st.sampled_from([0.005, 0.01, 0.05, 0.1]),
)
@settings(max_examples=60, deadline=None)
def test_rank_contract_property(values, epsilon):
    stream = np.array(values)
    sk = QuantileSketch.from_sorted(np.sort(stream), epsilon=epsilon)
    assert_invariant(sk)
    n = stream.size
    tol = max(1.0, epsilon * n) + 1e-9
    for q in (0.0, 0.25, 0.5, 0.75, 1.0):
        got = sk.quantile(q)
        lo, hi = oracles.rank_interval(values, got)
        assert lo - tol <= q * n <= hi + tol


@given(
    values=st.lists(
        st.floats(allow_nan=False, allow_infinity=False, min_value=-1e6, max_value=1e6),
        min_size=2,
        max_size=300,
    ),
    cut=st.integers(min_value=1, max_value=299),
)
@settings(max_examples=60, deadline=None)
def test_merge_rank_contract_property(values, cut):
    cut = min(cut, len(values) - 1)
    left, right = np.array(values[:cut]), np.array(values[cut:])
    merged = QuantileSketch.from_sorted(np.sort(left), epsilon=0.05).merge(
        QuantileSketch.from_sorted(np.sort(right), epsilon=0.05)
    )
    assert_invariant(merged)
    stream = np.array(values)
    tol = max(1.0, 0.05 * stream.size) + 1e-9
    for q in (0.0, 0.5, 1.0):
        got = merged.quantile(q)
        lo, hi = oracles.rank_interval(values, got)
        assert lo - tol <= q * stream.size <= hi + tol
