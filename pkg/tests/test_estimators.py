from __future__ import annotations

import numpy as np
import pytest

from guidepost.descriptors import MetricUndefined, heterogeneity, qcd, tukey_outliers
from guidepost.sketch.estimators import (
    approx_qcd,
    chao1_distinct,
    estimate_entropy,
    estimate_outlier_count,
)
from guidepost.sketch.heavy_hitters import HeavyHittersSketch
from guidepost.sketch.quantile import QuantileSketch
from guidepost.sketch.reservoir import ReservoirSample


def qsketch(values, epsilon=0.005):
    return QuantileSketch.from_sorted(np.sort(values), epsilon=epsilon)


def entropy_inputs(values, capacity=256, reservoir_capacity=4096, distinct=None):
    """Build the (heavy, reservoir) pair the estimator consumes."""
    values = np.asarray(values, dtype=np.int64)
    keys, counts = np.unique(values, return_counts=True)
    heavy = HeavyHittersSketch.from_counts(keys, counts, capacity)
    reservoir = ReservoirSample.from_column(
        np.arange(values.size), values.astype(np.float64), reservoir_capacity, seed=42
    )
    return estimate_entropy(heavy, reservoir, values.size, distinct=distinct)


# -- approx_qcd -----------------------------------------------------------------


def test_approx_qcd_tracks_exact(rng):
    for _ in range(10):
        vals = rng.lognormal(1.0, 0.7, 50_000)
        exact = qcd(vals).raw
        approx = approx_qcd(qsketch(vals)).raw
        assert approx == pytest.approx(exact, abs=0.02)


def test_approx_qcd_small_sketch_uses_order_statistics():
    vals = np.arange(1.0, 8.0)
    sv = approx_qcd(qsketch(vals))
    # Sketch quantiles are order statistics, not interpolated: with n=7 the
    # walk stops at rank floor(q*n), giving q1=1, q3=5 and qcd=(5-1)/(5+1).
    assert sv.raw == pytest.approx(2.0 / 3.0, abs=1e-12)
    assert sv.auxiliary["approximate"] is True


def test_approx_qcd_degenerate():
    with pytest.raises(MetricUndefined):
        approx_qcd(QuantileSketch())
    with pytest.raises(MetricUndefined):
        approx_qcd(qsketch(np.array([-1.0, -1.0, 1.0, 1.0])))


# -- outlier count ----------------------------------------------------------------


def test_outlier_estimate_within_bound(rng):
    epsilon = 0.005
    for trial in range(10):
        n = 50_000
        body = rng.normal(0, 1, n - 500)
        spikes = rng.choice([-1.0, 1.0], 500) * rng.uniform(10, 100, 500)
        vals = np.concatenate([body, spikes])
        rng.shuffle(vals)
        exact = tukey_outliers(vals).raw
        approx = estimate_outlier_count(qsketch(vals, epsilon)).raw
        assert abs(approx - exact) <= 4 * epsilon * n


def test_outlier_estimate_constant_column():
    sv = estimate_outlier_count(qsketch(np.full(100, 3.0)))
    assert sv.raw == 0.0


def test_outlier_estimate_requires_four():
    with pytest.raises(MetricUndefined):
        estimate_outlier_count(qsketch(np.array([1.0, 2.0, 3.0])))


def test_outlier_estimate_heavy_tails(rng):
    epsilon = 0.01
    vals = rng.standard_t(2.0, 30_000)
    exact = tukey_outliers(vals).raw
    approx = estimate_outlier_count(qsketch(vals, epsilon)).raw
    assert abs(approx - exact) <= 4 * epsilon * vals.size


# -- chao1 ------------------------------------------------------------------------


def test_chao1_worked_example():
    # 4 observed species, f1=2 singletons, f2=1 doubleton:
    # 4 + 2*1/(2*2) = 4.5
    assert chao1_distinct(np.array([1, 1, 2, 3])) == 4.5


def test_chao1_no_singletons_is_observed():
    assert chao1_distinct(np.array([5, 2, 2])) == 3.0


def test_chao1_empty():
    assert chao1_distinct(np.array([])) == 0.0


def test_chao1_estimates_hidden_species(rng):
    # Uniform over 2000 values, sample 1000 draws: many singletons, so the
    # estimate should land far above observed and near the truth's scale.
    draws = rng.integers(0, 2000, 1000)
    counts = np.unique(draws, return_counts=True)[1]
    est = chao1_distinct(counts)
    assert est > counts.size * 1.3


# -- entropy -----------------------------------------------------------------------


def test_entropy_exact_when_everything_tracked(rng):
    vals = rng.integers(0, 20, 5000)
    counts = np.unique(vals, return_counts=True)[1]
    exact = heterogeneity(counts)
    approx = entropy_inputs(vals, distinct=20)
    assert approx.raw == pytest.approx(exact.raw, abs=1e-9)
    assert approx.strength == pytest.approx(exact.strength, abs=1e-9)


def test_entropy_zipf_accuracy(rng):
    for k_values in (50, 1000, 5000):
        vals = (rng.zipf(1.3, 200_000) % k_values).astype(np.int64)
        counts = np.unique(vals, return_counts=True)[1]
        exact = heterogeneity(counts)
        approx = entropy_inputs(vals, distinct=int(counts.size))
        assert approx.raw == pytest.approx(exact.raw, abs=0.05), k_values


def test_entropy_zipf_accuracy_without_distinct(rng):
    # Chao1 supplies the category count; accuracy degrades but stays usable.
    vals = (rng.zipf(1.3, 200_000) % 1000).astype(np.int64)
    counts = np.unique(vals, return_counts=True)[1]
    exact = heterogeneity(counts)
    approx = entropy_inputs(vals, distinct=None)
    assert approx.raw == pytest.approx(exact.raw, abs=0.1)


def test_entropy_uniform_high(rng):
    vals = rng.integers(0, 3000, 200_000)
    counts = np.unique(vals, return_counts=True)[1]
    exact = heterogeneity(counts)
    approx = entropy_inputs(vals, distinct=int(counts.size))
    assert approx.raw == pytest.approx(exact.raw, abs=0.05)
    assert approx.strength < 0.05  # near-uniform => near-zero concentration


def test_entropy_single_category_degenerate():
    with pytest.raises(MetricUndefined):
        entropy_inputs(np.zeros(100, dtype=np.int64), distinct=1)


def test_entropy_empty_degenerate():
    heavy = HeavyHittersSketch(4)
    reservoir = ReservoirSample(4, seed=1)
    with pytest.raises(MetricUndefined):
        estimate_entropy(heavy, reservoir, 0)


def test_entropy_strength_bounds(rng):
    vals = (rng.zipf(2.0, 10_000) % 500).astype(np.int64)
    sv = entropy_inputs(vals)
    assert 0.0 <= sv.raw <= 1.0
    assert 0.0 <= sv.strength <= 1.0
    assert sv.auxiliary["approximate"] is True
    assert sv.auxiliary["distinct"] >= 1
