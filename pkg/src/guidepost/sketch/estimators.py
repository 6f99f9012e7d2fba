"""Descriptor metrics recovered from sketches instead of raw columns.

Each estimator mirrors one exact metric in ``guidepost.descriptors`` and
returns the same StrengthValue shape with an ``approximate: True`` marker,
so ranking code can treat exact and sketched columns interchangeably.
"""
from __future__ import annotations

import math
from typing import Dict, Optional

import numpy as np

from ..descriptors import MetricUndefined, StrengthValue
from .heavy_hitters import HeavyHittersSketch
from .quantile import QuantileSketch
from .reservoir import ReservoirSample


def approx_qcd(sketch: QuantileSketch) -> StrengthValue:
    if sketch.n < 2:
        raise MetricUndefined("qcd requires at least two values")
    q1 = sketch.quantile(0.25)
    q3 = sketch.quantile(0.75)
    denom = q3 + q1
    if denom == 0:
        raise MetricUndefined("qcd undefined for zero-centered quartiles")
    value = (q3 - q1) / denom
    return StrengthValue(
        raw=value,
        strength=value,
        auxiliary={"q1": q1, "q3": q3, "approximate": True},
    )


def estimate_outlier_count(sketch: QuantileSketch) -> StrengthValue:
    """Points outside the Tukey fences, counted through sketch ranks.

    inliers = rank_le(high fence) - rank_lt(low fence); each of the two
    rank queries and two quartile queries is off by at most epsilon * n,
    so the count carries error at most 4 * epsilon * n.
    """
    if sketch.n < 4:
        raise MetricUndefined("outlier count requires at least four values")
    q1 = sketch.quantile(0.25)
    median = sketch.quantile(0.5)
    q3 = sketch.quantile(0.75)
    iqr = q3 - q1
    fence_low = q1 - 1.5 * iqr
    fence_high = q3 + 1.5 * iqr
    inliers = sketch.rank_le(fence_high) - sketch.rank_lt(fence_low)
    count = max(0, sketch.n - inliers)
    return StrengthValue(
        raw=float(count),
        strength=float(count),
        auxiliary={
            "fence_low": fence_low,
            "fence_high": fence_high,
            "min": sketch.quantile(0.0),
            "q1": q1,
            "median": median,
            "q3": q3,
            "max": sketch.quantile(1.0),
            "approximate": True,
        },
    )


def chao1_distinct(counts: np.ndarray) -> float:
    """Bias-corrected Chao1 estimate of total distinct values.

    ``counts`` are per-value frequencies observed in a uniform sample.
    """
    counts = np.asarray(counts)
    observed = int((counts > 0).sum())
    if observed == 0:
        return 0.0
    f1 = int((counts == 1).sum())
    f2 = int((counts == 2).sum())
    return observed + f1 * (f1 - 1) / (2.0 * (f2 + 1))


def _plugin_entropy(masses: np.ndarray, total: float) -> float:
    masses = masses[masses > 0]
    if masses.size == 0:
        return 0.0
    p = masses / total
    return float(-(p * np.log(p)).sum())


def estimate_entropy(
    heavy: HeavyHittersSketch,
    reservoir: ReservoirSample,
    n_present: int,
    distinct: Optional[int] = None,
) -> StrengthValue:
    """Normalized Shannon entropy composed from two sketches.

    Heavy-hitter estimates pin down the dominant categories; the residual
    mass (n minus tracked mass) is split between values seen only in the
    reservoir and entirely unseen values, using the Good-Turing singleton
    fraction of the reservoir as the unseen-mass estimate. ``distinct``
    supplies the exact category count when the dataset tracked it;
    otherwise Chao1 on the reservoir fills in.
    """
    if n_present <= 0:
        raise MetricUndefined("entropy requires at least one value")
    heavy_counts = {key: max(0, est) for key, est in heavy.counters.items()}
    heavy_keys = set(heavy_counts)

    sample_values, sample_counts = reservoir.value_counts()
    light = np.array(
        [int(k) not in heavy_keys for k in sample_values], dtype=bool
    ) if sample_values.size else np.zeros(0, dtype=bool)
    light_counts = sample_counts[light]
    light_total = int(light_counts.sum())
    light_singletons = int((light_counts == 1).sum())

    if distinct is not None:
        k_hat = float(distinct)
    else:
        # Heavy keys absent from the sample are still observed species.
        extra = len(heavy_keys - set(int(v) for v in sample_values))
        k_hat = chao1_distinct(sample_counts) + extra
    if k_hat <= 1:
        raise MetricUndefined("degenerate (single category)")

    tracked = sum(heavy_counts.values())
    residual = max(0, n_present - tracked)
    masses = [float(c) for c in heavy_counts.values() if c > 0]
    if residual > 0:
        unseen_slots = max(0.0, math.floor(k_hat) - len(heavy_keys) - light_counts.size)
        unseen_mass = 0.0
        if light_total > 0:
            unseen_fraction = light_singletons / light_total if unseen_slots >= 1 else 0.0
            seen_mass = residual * (1.0 - unseen_fraction)
            unseen_mass = residual - seen_mass
            masses.extend(seen_mass * light_counts / light_total)
        elif unseen_slots >= 1:
            unseen_mass = float(residual)
        elif tracked > 0 and masses:
            # No sample evidence of further values and no room for unseen
            # ones: the residual is undercount of the tracked categories.
            scale = (tracked + residual) / tracked
            masses = [m * scale for m in masses]
        if unseen_mass > 0 and unseen_slots >= 1:
            masses.extend([unseen_mass / unseen_slots] * int(unseen_slots))
    entropy = _plugin_entropy(np.asarray(masses, dtype=np.float64), float(n_present))
    normalized = entropy / math.log(k_hat)
    normalized = min(1.0, max(0.0, normalized))
    return StrengthValue(
        raw=normalized,
        strength=1.0 - normalized,
        auxiliary={"distinct": round(k_hat), "approximate": True},
    )
