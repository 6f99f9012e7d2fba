from __future__ import annotations

import numpy as np
import pytest

from guidepost.sketch.hyperplane import (
    HyperplaneSketch,
    IncomparableSketches,
    approx_pearson,
    build_hyperplane_sketches,
    gaussian_row,
)


def build_single(values, k=256, seed=42, mask=None, row_offset=0):
    values = np.asarray(values, dtype=np.float64)
    filled = np.where(mask, values, 0.0) if mask is not None else values
    mean = float(values[mask].mean()) if mask is not None else float(values.mean())
    return build_hyperplane_sketches(
        filled[:, None], [mask], [mean], k=k, seed=seed, row_offset=row_offset
    )[0]


def test_weights_are_prefix_stable():
    full = gaussian_row(42, 3, 100)
    np.testing.assert_array_equal(gaussian_row(42, 3, 40), full[:40])
    np.testing.assert_array_equal(gaussian_row(42, 3, 60, row_offset=40), full[40:])


def test_weights_differ_by_hyperplane_and_seed():
    assert not np.array_equal(gaussian_row(42, 0, 50), gaussian_row(42, 1, 50))
    assert not np.array_equal(gaussian_row(42, 0, 50), gaussian_row(43, 0, 50))


def test_identical_columns_agree_exactly(rng):
    x = rng.normal(size=500)
    a, b = (build_single(x) for _ in range(2))
    assert a.hamming(b) == 0
    assert approx_pearson(a, b).raw == 1.0


def test_negated_column_is_anticorrelated(rng):
    x = rng.normal(size=500)
    a = build_single(x)
    b = build_single(-x)
    assert a.hamming(b) == a.k
    assert approx_pearson(a, b).raw == -1.0


def test_scaling_does_not_change_signature(rng):
    x = rng.normal(size=500)
    a = build_single(x)
    b = build_single(5.0 * x)
    assert a.hamming(b) == 0


def test_estimate_tracks_true_correlation(rng):
    n, k = 4000, 1024
    for rho in (-0.9, -0.5, 0.0, 0.5, 0.9):
        u = rng.normal(size=n)
        v = rng.normal(size=n)
        y = rho * u + np.sqrt(1 - rho * rho) * v
        est = approx_pearson(build_single(u, k=k), build_single(y, k=k)).raw
        true = float(np.corrcoef(u, y)[0, 1])
        # Binomial noise of the k-bit signature: a few standard errors.
        assert est == pytest.approx(true, abs=4 * np.pi / np.sqrt(k))


def test_incomparable_sketches_rejected(rng):
    x = rng.normal(size=100)
    base = build_single(x, k=128, seed=1)
    with pytest.raises(IncomparableSketches):
        base.hamming(build_single(x, k=256, seed=1))
    with pytest.raises(IncomparableSketches):
        base.hamming(build_single(x, k=128, seed=2))
    with pytest.raises(IncomparableSketches):
        base.merge(build_single(x, k=256, seed=1), mean=0.0)


def test_k_validation(rng):
    x = rng.normal(size=10)[:, None]
    with pytest.raises(ValueError):
        build_hyperplane_sketches(x, [None], [0.0], k=100, seed=1)
    with pytest.raises(ValueError):
        build_hyperplane_sketches(x, [None], [0.0], k=0, seed=1)


def test_merge_equals_whole_build(rng):
    n = 2000
    x = rng.normal(3.0, 2.0, n)
    whole = build_single(x, k=256, seed=7)
    cut = 797
    left = build_single(x[:cut], k=256, seed=7)
    right = build_single(x[cut:], k=256, seed=7, row_offset=cut)
    merged = left.merge(right, mean=float(x.mean()))
    # Partition sums re-associate float additions, so proj/weight agree to
    # rounding; the signatures themselves must match.
    np.testing.assert_allclose(merged.proj, whole.proj, rtol=1e-10)
    np.testing.assert_allclose(merged.weight, whole.weight, rtol=1e-10)
    np.testing.assert_array_equal(merged.bits, whole.bits)
    assert merged.n_rows == n


def test_merge_with_missing_cells(rng):
    n = 1500
    x = rng.normal(size=n)
    mask = rng.uniform(size=n) > 0.2
    whole = build_single(x, k=256, seed=7, mask=mask)
    cut = 700
    left = build_single(x[:cut], k=256, seed=7, mask=mask[:cut])
    right = build_single(x[cut:], k=256, seed=7, mask=mask[cut:], row_offset=cut)
    mean = float(x[mask].mean())
    merged = left.merge(right, mean=mean)
    np.testing.assert_array_equal(merged.bits, whole.bits)
    np.testing.assert_allclose(merged.proj, whole.proj, rtol=1e-10)
    np.testing.assert_allclose(merged.weight, whole.weight, rtol=1e-10)


def test_missing_cells_contribute_nothing(rng):
    # A masked build over x equals a full build over the same rows with the
    # missing cells zeroed and the mean taken over present cells only.
    n = 800
    x = rng.normal(size=n)
    mask = rng.uniform(size=n) > 0.3
    masked = build_single(x, mask=mask)
    dense = np.where(mask, x, 0.0)
    mean = float(x[mask].mean())
    manual_t = np.array(
        [float(gaussian_row(42, j, n) @ dense) for j in range(masked.k)]
    )
    manual_u = np.array(
        [float(gaussian_row(42, j, n) @ mask.astype(float)) for j in range(masked.k)]
    )
    np.testing.assert_allclose(masked.proj, manual_t, rtol=1e-10, atol=1e-10)
    np.testing.assert_allclose(masked.weight, manual_u, rtol=1e-10, atol=1e-10)
    expected_bits = (manual_t - mean * manual_u) >= 0
    got_bits = np.unpackbits(
        masked.bits.view(np.uint8), bitorder="little"
    ).astype(bool)
    np.testing.assert_array_equal(got_bits, expected_bits)


def test_shared_hyperplanes_across_columns(rng):
    # Batch build must equal per-column builds: same weights for every column.
    n, d = 400, 3
    data = rng.normal(size=(n, d))
    means = data.mean(axis=0)
    batch = build_hyperplane_sketches(data, [None] * d, means, k=128, seed=5)
    for c in range(d):
        single = build_single(data[:, c], k=128, seed=5)
        np.testing.assert_allclose(batch[c].proj, single.proj, rtol=1e-12)
        np.testing.assert_array_equal(batch[c].bits, single.bits)


def test_serialization_round_trip(rng):
    sk = build_single(rng.normal(size=300), k=192, seed=11)
    back = HyperplaneSketch.from_bytes(sk.to_bytes())
    assert back.k == sk.k
    assert back.seed == sk.seed
    assert back.n_rows == sk.n_rows
    assert back.mean == sk.mean
    np.testing.assert_array_equal(back.bits, sk.bits)
    np.testing.assert_array_equal(back.proj, sk.proj)
    np.testing.assert_array_equal(back.weight, sk.weight)
    assert back.to_bytes() == sk.to_bytes()


def test_build_is_deterministic(rng):
    x = rng.normal(size=256)
    a = build_single(x, k=128, seed=3)
    b = build_single(x.copy(), k=128, seed=3)
    assert a.to_bytes() == b.to_bytes()
