"""Exact strength metrics for the six descriptors, plus chart payloads.

Each descriptor ranks the instances it is defined on by a scalar strength:
quartile coefficient of dispersion, |skewness|, kurtosis, Tukey outlier
count, frequency concentration (one minus normalized Shannon entropy), and
|Pearson correlation|. Conventions are pinned here so the exact and
sketch-based paths agree:

- quantiles use linear interpolation on the sorted sample at (n-1)*q;
- moments use population normalization (divide by n);
- entropy uses natural log, normalized by ln(K);
- a value exactly on a Tukey fence is an inlier;
- the significance-adjusted correlation keeps |rho| when p <= alpha and
  is zero otherwise.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy import stats

HISTOGRAM = "histogram"
BOXPLOT = "boxplot"
PARETO = "pareto"
SCATTER = "scatter"

DESCENDING = "descending"
ASCENDING = "ascending"

# Payload caps keep guidepost JSON bounded on pathological columns.
MAX_STORED_OUTLIERS = 256
DEFAULT_PARETO_CATEGORIES = 50
DEFAULT_SCATTER_POINTS = 1000
DEFAULT_HISTOGRAM_BINS = 20
OTHER_CATEGORY = "__other__"


class MetricUndefined(Exception):
    """A metric is not defined on this instance; carries the exclusion reason."""

    def __init__(self, reason: str):
        super().__init__(reason)
        self.reason = reason


@dataclass(frozen=True)
class Descriptor:
    """A statistical descriptor: arity, preferred metric, chart, default order."""

    name: str
    arity: int
    metric: str
    chart: str
    default_order: str


DESCRIPTORS = {
    d.name: d
    for d in (
        Descriptor("dispersion", 1, "qcd", HISTOGRAM, ASCENDING),
        Descriptor("skew", 1, "skewness", HISTOGRAM, DESCENDING),
        Descriptor("heavy_tails", 1, "kurtosis", HISTOGRAM, DESCENDING),
        Descriptor("outliers", 1, "outlier_count", BOXPLOT, DESCENDING),
        Descriptor(
            "heterogeneous_frequencies", 1, "frequency_concentration", PARETO, DESCENDING
        ),
        Descriptor("linear_relationship", 2, "abs_pearson", SCATTER, DESCENDING),
    )
}

# Carousel/display order: univariate descriptors first.
DESCRIPTOR_ORDER = [
    "dispersion",
    "skew",
    "heavy_tails",
    "outliers",
    "heterogeneous_frequencies",
    "linear_relationship",
]


def get_descriptor(name: str) -> Descriptor:
    try:
        return DESCRIPTORS[name]
    except KeyError:
        raise MetricUndefined(f"unknown descriptor {name!r}") from None


@dataclass
class StrengthValue:
    """A metric evaluation: signed raw value, ranking strength, and extras."""

    raw: float
    strength: float
    auxiliary: dict = field(default_factory=dict)


def _quantile(sorted_values: np.ndarray, q: float) -> float:
    """Linear-interpolation quantile at position (n-1)*q of a sorted array."""
    n = sorted_values.size
    if n == 0:
        raise MetricUndefined("empty column")
    pos = (n - 1) * q
    lo = int(np.floor(pos))
    hi = int(np.ceil(pos))
    if lo == hi:
        return float(sorted_values[lo])
    frac = pos - lo
    return float(sorted_values[lo] * (1.0 - frac) + sorted_values[hi] * frac)


def quartiles(values: np.ndarray) -> tuple:
    s = np.sort(np.asarray(values, dtype=np.float64))
    return _quantile(s, 0.25), _quantile(s, 0.75)


def qcd(values: np.ndarray) -> StrengthValue:
    """Quartile coefficient of dispersion (Q3 - Q1) / (Q3 + Q1)."""
    values = np.asarray(values, dtype=np.float64)
    if values.size < 2:
        raise MetricUndefined("too few values (need >= 2)")
    q1, q3 = quartiles(values)
    denom = q3 + q1
    if denom == 0.0:
        raise MetricUndefined("qcd undefined")
    value = (q3 - q1) / denom
    return StrengthValue(raw=value, strength=value, auxiliary={"q1": q1, "q3": q3})


def _moments(values: np.ndarray) -> tuple:
    """Mean, variance, and centered values normalized by their largest
    magnitude. Squaring the normalized values keeps higher powers of tiny
    columns out of the subnormal range, where precision collapses."""
    mu = float(np.mean(values))
    # Identical cells must yield exactly zero variance even when the rounded
    # mean differs from the shared value by an ulp.
    if values.size and values[0] == values.min() == values.max():
        return mu, 0.0, np.zeros_like(values), 0.0
    centered = values - mu
    scale = float(np.max(np.abs(centered)))
    if not math.isfinite(scale):
        raise MetricUndefined("non-finite moment")
    if scale == 0.0:
        return mu, 0.0, centered, 0.0
    z = centered / scale
    var_z = float(np.mean(z * z))
    var = var_z * scale * scale
    if not math.isfinite(var):
        raise MetricUndefined("non-finite moment")
    return mu, var, z, var_z


def skewness(values: np.ndarray) -> StrengthValue:
    """Standardized skewness coefficient with population normalization."""
    values = np.asarray(values, dtype=np.float64)
    if values.size < 1:
        raise MetricUndefined("empty column")
    mu, var, z, var_z = _moments(values)
    if var == 0.0:
        raise MetricUndefined("degenerate (constant column)")
    g1 = float(np.mean(z**3)) / var_z**1.5
    return StrengthValue(
        raw=g1, strength=abs(g1), auxiliary={"mean": mu, "std": math.sqrt(var)}
    )


def kurtosis(values: np.ndarray) -> StrengthValue:
    """Non-excess kurtosis with population normalization (normal ~ 3)."""
    values = np.asarray(values, dtype=np.float64)
    if values.size < 1:
        raise MetricUndefined("empty column")
    mu, var, z, var_z = _moments(values)
    if var == 0.0:
        raise MetricUndefined("degenerate (constant column)")
    kurt = float(np.mean(z**4)) / var_z**2
    return StrengthValue(
        raw=kurt, strength=kurt, auxiliary={"mean": mu, "std": math.sqrt(var)}
    )


def tukey_fences(q1: float, q3: float) -> tuple:
    iqr = q3 - q1
    return q1 - 1.5 * iqr, q3 + 1.5 * iqr


def tukey_outliers(values: np.ndarray) -> StrengthValue:
    """Count of values strictly outside the Tukey fences.

    Auxiliary carries the fences, the five-number summary, and up to
    MAX_STORED_OUTLIERS outlier values for the box plot.
    """
    values = np.asarray(values, dtype=np.float64)
    if values.size < 4:
        raise MetricUndefined("too few values (need >= 4)")
    s = np.sort(values)
    q1, q3 = _quantile(s, 0.25), _quantile(s, 0.75)
    lo, hi = tukey_fences(q1, q3)
    outlier_mask = (values < lo) | (values > hi)
    count = int(outlier_mask.sum())
    outlier_values = np.sort(values[outlier_mask])
    if outlier_values.size > MAX_STORED_OUTLIERS:
        half = MAX_STORED_OUTLIERS // 2
        outlier_values = np.concatenate([outlier_values[:half], outlier_values[-half:]])
    return StrengthValue(
        raw=float(count),
        strength=float(count),
        auxiliary={
            "fence_low": lo,
            "fence_high": hi,
            "q1": q1,
            "q3": q3,
            "median": _quantile(s, 0.5),
            "min": float(s[0]),
            "max": float(s[-1]),
            "outlier_values": [float(v) for v in outlier_values],
        },
    )


def shannon_entropy(counts: np.ndarray) -> float:
    """Entropy in nats of the empirical distribution given by counts."""
    counts = np.asarray(counts, dtype=np.float64)
    counts = counts[counts > 0]
    p = counts / counts.sum()
    return float(-(p * np.log(p)).sum())


def heterogeneity(counts: np.ndarray) -> StrengthValue:
    """Frequency concentration: 1 - H/ln(K) over per-value counts.

    High strength means a few heavy hitters dominate; the uniform
    distribution scores zero.
    """
    counts = np.asarray(counts, dtype=np.float64)
    counts = counts[counts > 0]
    k = counts.size
    if k <= 1:
        raise MetricUndefined("degenerate (single category)")
    h_norm = shannon_entropy(counts) / np.log(k)
    h_norm = min(max(h_norm, 0.0), 1.0)
    top = np.sort(counts)[::-1][:10]
    return StrengthValue(
        raw=h_norm,
        strength=1.0 - h_norm,
        auxiliary={"distinct": int(k), "top_counts": [int(c) for c in top]},
    )


def _corr(x: np.ndarray, y: np.ndarray) -> tuple:
    """Signed correlation plus least-squares slope/intercept; two-pass."""
    mu_x, var_x, zx, vz_x = _moments(x)
    mu_y, var_y, zy, vz_y = _moments(y)
    if var_x == 0.0 or var_y == 0.0:
        raise MetricUndefined("degenerate (constant column)")
    rho = float(np.mean(zx * zy)) / math.sqrt(vz_x * vz_y)
    rho = min(max(rho, -1.0), 1.0)
    slope = rho * math.sqrt(var_y) / math.sqrt(var_x)
    return rho, slope, mu_y - slope * mu_x


def pearson(x: np.ndarray, y: np.ndarray) -> StrengthValue:
    """Pearson correlation over pairwise-complete cells; strength is |rho|."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.size != y.size:
        raise MetricUndefined("length mismatch")
    if x.size < 3:
        raise MetricUndefined("too few pairwise-complete values (need >= 3)")
    rho, slope, intercept = _corr(x, y)
    return StrengthValue(
        raw=rho,
        strength=abs(rho),
        auxiliary={"slope": slope, "intercept": intercept, "n": int(x.size)},
    )


def correlation_p_value(rho: float, n: int) -> float:
    """Two-sided p-value for rho against a Student-t(n-2) reference."""
    if n <= 2:
        raise MetricUndefined("too few values for a significance test")
    if abs(rho) >= 1.0:
        return 0.0
    t = abs(rho) * np.sqrt((n - 2) / (1.0 - rho * rho))
    return float(2.0 * stats.t.sf(t, df=n - 2))


def significance_adjusted_pearson(
    x: np.ndarray, y: np.ndarray, alpha: float = 0.05
) -> StrengthValue:
    """|rho| when the correlation is significant at alpha, else zero."""
    base = pearson(x, y)
    n = base.auxiliary["n"]
    p = correlation_p_value(base.raw, n)
    strength = abs(base.raw) if p <= alpha else 0.0
    aux = dict(base.auxiliary)
    aux["p_value"] = p
    aux["alpha"] = alpha
    return StrengthValue(raw=base.raw, strength=strength, auxiliary=aux)


# -- visualization payloads ---------------------------------------------------


@dataclass
class VisualizationPayload:
    variant: str
    data: dict

    def to_dict(self) -> dict:
        return {"variant": self.variant, **self.data}


def histogram_payload(values: np.ndarray, bin_count: int = DEFAULT_HISTOGRAM_BINS) -> VisualizationPayload:
    """Equal-width histogram over [min, max]; counts sum to the value count.

    Bins are half-open [lo, hi) except the last, which is closed. A constant
    column collapses to a single zero-width bin holding everything.
    """
    values = np.asarray(values, dtype=np.float64)
    if bin_count < 1:
        raise ValueError("bin_count must be >= 1")
    if values.size == 0:
        raise MetricUndefined("empty column")
    lo, hi = float(values.min()), float(values.max())
    # A span too narrow to cut into bin_count distinct float edges collapses
    # to the single-bin form as well.
    if lo == hi or lo + (hi - lo) / bin_count == lo:
        return VisualizationPayload(
            HISTOGRAM, {"bin_edges": [lo, hi], "counts": [int(values.size)]}
        )
    counts, edges = np.histogram(values, bins=bin_count, range=(lo, hi))
    return VisualizationPayload(
        HISTOGRAM,
        {"bin_edges": [float(e) for e in edges], "counts": [int(c) for c in counts]},
    )


def boxplot_payload(values: np.ndarray) -> VisualizationPayload:
    """Five-number summary, Tukey fences, and the outlier values."""
    sv = tukey_outliers(values)
    aux = sv.auxiliary
    return VisualizationPayload(
        BOXPLOT,
        {
            "min": aux["min"],
            "q1": aux["q1"],
            "median": aux["median"],
            "q3": aux["q3"],
            "max": aux["max"],
            "fence_low": aux["fence_low"],
            "fence_high": aux["fence_high"],
            "outliers": aux["outlier_values"],
            "outlier_count": int(sv.strength),
        },
    )


def pareto_payload(
    labels: Sequence[str],
    counts: np.ndarray,
    max_categories: int = DEFAULT_PARETO_CATEGORIES,
    total: Optional[int] = None,
) -> VisualizationPayload:
    """Categories by descending frequency with cumulative fractions ending at 1.

    When more than max_categories exist, the tail is aggregated into a
    single OTHER_CATEGORY entry so the cumulative line still reaches 1.
    ``total`` overrides the denominator when counts cover only part of the
    column (the sketch path passes the true row count).
    """
    counts = np.asarray(counts, dtype=np.int64)
    if len(labels) != counts.size:
        raise ValueError("labels and counts must align")
    order = sorted(range(counts.size), key=lambda i: (-counts[i], str(labels[i])))
    ordered_labels = [str(labels[i]) for i in order]
    ordered_counts = [int(counts[i]) for i in order]
    denom = int(total) if total is not None else int(sum(ordered_counts))
    if denom <= 0:
        raise MetricUndefined("empty column")
    residual = denom - sum(ordered_counts)
    if len(ordered_labels) > max_categories:
        head_labels = ordered_labels[: max_categories - 1]
        head_counts = ordered_counts[: max_categories - 1]
        residual += sum(ordered_counts[max_categories - 1 :])
        ordered_labels, ordered_counts = head_labels, head_counts
    if residual > 0:
        ordered_labels.append(OTHER_CATEGORY)
        ordered_counts.append(int(residual))
    cumulative = []
    running = 0
    for c in ordered_counts:
        running += c
        cumulative.append(running / denom)
    return VisualizationPayload(
        PARETO,
        {"categories": ordered_labels, "counts": ordered_counts, "cumulative": cumulative},
    )


def scatter_payload(
    x: np.ndarray,
    y: np.ndarray,
    max_points: int = DEFAULT_SCATTER_POINTS,
    priorities: Optional[np.ndarray] = None,
) -> VisualizationPayload:
    """Sampled (x, y) points with the least-squares best-fit line.

    Emits all points when n <= max_points; otherwise keeps the max_points
    rows with the smallest priorities (the shared row-sampling rule), so the
    selection matches the sketch bundle's reservoir.
    """
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.size != y.size:
        raise ValueError("x and y must align")
    if x.size < 3:
        raise MetricUndefined("too few pairwise-complete values (need >= 3)")
    _, slope, intercept = _corr(x, y)
    if x.size > max_points:
        if priorities is None:
            priorities = np.arange(x.size, dtype=np.uint64)
        keep = np.argsort(priorities, kind="stable")[:max_points]
        keep.sort()
        x, y = x[keep], y[keep]
    return VisualizationPayload(
        SCATTER,
        {
            "x": [float(v) for v in x],
            "y": [float(v) for v in y],
            "slope": slope,
            "intercept": intercept,
        },
    )
