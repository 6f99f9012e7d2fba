"""Guidepost queries: instance enumeration, ranking, neighborhoods, overviews.

A *guidepost* is a chart for one instance of a statistical descriptor — a
single column for the unary descriptors, an (i, j) column pair for linear
relationships — scored by that descriptor's strength metric. This module
enumerates the admissible instances of a dataset, ranks them exactly (from
full columns) or approximately (from a sketch bundle), finds the
neighborhood of a focused guidepost, and produces whole-dataset overview
vectors/matrices.

Determinism contract: identical (dataset, bundle, query) inputs produce an
identical result list. Ties in strength break by ascending attribute-index
order in both sort directions, so flipping the order reverses the ranking
up to tie groups.
"""
from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy import stats

from . import descriptors as desc
from .dataset import CATEGORICAL_KIND, NUMERIC_KIND, Dataset
from .descriptors import (
    ASCENDING,
    DESCENDING,
    DESCRIPTOR_ORDER,
    MetricUndefined,
    StrengthValue,
    VisualizationPayload,
    get_descriptor,
)
from .rowhash import row_priorities
from .sketch import (
    SketchBundle,
    approx_pearson,
    approx_qcd,
    estimate_entropy,
    estimate_outlier_count,
    moments_to_metrics,
)
from .sketch.bundle import ColumnSketches

EXACT = "exact"
APPROXIMATE = "approximate"
SIGNIFICANCE_METRIC = "significance_adjusted"

DEFAULT_K = 10
DEFAULT_ALPHA = 0.05
MAX_EXACT_OVERVIEW_COLUMNS = 200


class EngineError(Exception):
    pass


class StaleBundleError(EngineError):
    """The bundle's fingerprint does not match the dataset."""


class UnknownGuidepostError(EngineError):
    """No instance of any descriptor hashes to the requested id."""


class OverviewTooLargeError(EngineError):
    """Exact pairwise overviews are refused above MAX_EXACT_OVERVIEW_COLUMNS."""


@dataclass
class GuidepostQuery:
    """Validated parameters of a ranking query."""

    descriptor: str
    metric: Optional[str] = None
    order: Optional[str] = None
    k: int = DEFAULT_K
    min_strength: Optional[float] = None
    max_strength: Optional[float] = None
    mode: str = EXACT
    alpha: float = DEFAULT_ALPHA

    def __post_init__(self) -> None:
        spec = get_descriptor(self.descriptor)  # raises on unknown kind
        if self.metric is None:
            self.metric = spec.metric
        elif self.metric not in (spec.metric, SIGNIFICANCE_METRIC):
            raise ValueError(f"unknown metric {self.metric!r} for {self.descriptor}")
        if self.metric == SIGNIFICANCE_METRIC and spec.arity != 2:
            raise ValueError("significance adjustment applies to correlation only")
        if self.order is None:
            self.order = spec.default_order
        elif self.order not in (ASCENDING, DESCENDING):
            raise ValueError(f"order must be {ASCENDING!r} or {DESCENDING!r}")
        if self.k < 1:
            raise ValueError("k must be >= 1")
        if (
            self.min_strength is not None
            and self.max_strength is not None
            and self.min_strength > self.max_strength
        ):
            raise ValueError("invalid filter range: min > max")
        if self.mode not in (EXACT, APPROXIMATE):
            raise ValueError(f"mode must be {EXACT!r} or {APPROXIMATE!r}")
        if not (0.0 < self.alpha < 1.0):
            raise ValueError("alpha must lie in (0, 1)")


@dataclass(frozen=True)
class Instance:
    indices: Tuple[int, ...]
    admissible: bool
    reason: Optional[str] = None


@dataclass
class InstanceSet:
    descriptor: str
    instances: List[Instance]

    def admissible(self) -> List[Tuple[int, ...]]:
        return [i.indices for i in self.instances if i.admissible]


@dataclass
class Guidepost:
    id: str
    descriptor: str
    indices: Tuple[int, ...]
    names: Tuple[str, ...]
    value: StrengthValue
    payload: Optional[VisualizationPayload]
    approximate: bool

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "descriptor": self.descriptor,
            "columns": [
                {"index": int(i), "name": n} for i, n in zip(self.indices, self.names)
            ],
            "raw": float(self.value.raw),
            "strength": float(self.value.strength),
            "auxiliary": _plain(self.value.auxiliary),
            "approximate": self.approximate,
            "payload": self.payload.to_dict() if self.payload else None,
        }


@dataclass
class NeighborhoodResult:
    focus_id: str
    descriptor: str
    focus_indices: Tuple[int, ...]
    n_x: List[Guidepost]
    n_y: List[Guidepost]
    n_xy: List[Guidepost]

    def to_dict(self) -> dict:
        return {
            "focus_id": self.focus_id,
            "descriptor": self.descriptor,
            "focus_columns": [int(i) for i in self.focus_indices],
            "n_x": [g.to_dict() for g in self.n_x],
            "n_y": [g.to_dict() for g in self.n_y],
            "n_xy": [g.to_dict() for g in self.n_xy],
        }


def _plain(obj):
    """Recursively convert numpy scalars/arrays for JSON serialization."""
    if isinstance(obj, dict):
        return {k: _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    return obj


def guidepost_id(fingerprint: str, descriptor: str, indices: Sequence[int]) -> str:
    """Stable id: columns are identified canonically, so (i, j) == (j, i)."""
    canon = ",".join(str(i) for i in sorted(int(i) for i in indices))
    digest = hashlib.sha256(f"{fingerprint}|{descriptor}|{canon}".encode()).hexdigest()
    return digest[:16]


def resolve_guidepost(dataset: Dataset, gid: str) -> Tuple[str, Tuple[int, ...]]:
    """Find the (descriptor, tuple) whose id is ``gid``; ids cover all instances."""
    for name in DESCRIPTOR_ORDER:
        for inst in enumerate_instances(dataset, name).instances:
            if guidepost_id(dataset.fingerprint, name, inst.indices) == gid:
                return name, inst.indices
    raise UnknownGuidepostError(f"unknown guidepost id {gid!r}")


# -- instance enumeration ---------------------------------------------------


def _numeric_profile(dataset: Dataset, idx: int) -> Tuple[int, bool]:
    """(present count, is constant) for a numeric column."""
    col = dataset.numeric(idx)
    present = col.present()
    constant = bool(present.size) and float(present.min()) == float(present.max())
    return int(present.size), constant


def enumerate_instances(dataset: Dataset, descriptor: str) -> InstanceSet:
    spec = get_descriptor(descriptor)
    instances: List[Instance] = []

    if descriptor == "heterogeneous_frequencies":
        for idx in dataset.categorical_indices():
            meta = dataset.meta(idx)
            if meta.distinct_count is None or meta.distinct_count < 1:
                instances.append(Instance((idx,), False, "empty column"))
            elif meta.distinct_count < 2:
                instances.append(Instance((idx,), False, "degenerate (single category)"))
            else:
                instances.append(Instance((idx,), True))
        for idx in dataset.numeric_indices():
            if not dataset.meta(idx).integer_valued:
                continue
            n_present, constant = _numeric_profile(dataset, idx)
            if n_present == 0:
                instances.append(Instance((idx,), False, "empty column"))
            elif constant:
                instances.append(Instance((idx,), False, "degenerate (single category)"))
            else:
                instances.append(Instance((idx,), True))
        instances.sort(key=lambda inst: inst.indices)
        return InstanceSet(descriptor, instances)

    if spec.arity == 1:
        min_n = {"dispersion": 2, "outliers": 4}.get(descriptor, 1)
        needs_spread = descriptor in ("skew", "heavy_tails")
        for idx in dataset.numeric_indices():
            n_present, constant = _numeric_profile(dataset, idx)
            if n_present == 0:
                instances.append(Instance((idx,), False, "empty column"))
            elif n_present < min_n:
                instances.append(
                    Instance((idx,), False, f"too few values (need >= {min_n})")
                )
            elif needs_spread and constant:
                instances.append(Instance((idx,), False, "degenerate (constant column)"))
            else:
                instances.append(Instance((idx,), True))
        return InstanceSet(descriptor, instances)

    # Linear relationship: all pairs (i, j), i < j, over numeric columns.
    eligible: Dict[int, Optional[str]] = {}
    for idx in dataset.numeric_indices():
        n_present, constant = _numeric_profile(dataset, idx)
        if n_present == 0:
            eligible[idx] = "empty column"
        elif constant:
            eligible[idx] = "degenerate (constant column)"
        elif n_present < 3:
            eligible[idx] = "too few values (need >= 3)"
        else:
            eligible[idx] = None
    ordered = sorted(eligible)
    for a in range(len(ordered)):
        for b in range(a + 1, len(ordered)):
            i, j = ordered[a], ordered[b]
            reason = eligible[i] or eligible[j]
            instances.append(Instance((i, j), reason is None, reason))
    return InstanceSet(descriptor, instances)


# -- metric evaluation -------------------------------------------------------


def _exact_unary_values(dataset: Dataset, descriptor: str, idx: int) -> np.ndarray:
    return dataset.numeric(idx).present()


def _category_counts(dataset: Dataset, idx: int) -> np.ndarray:
    meta = dataset.meta(idx)
    if meta.kind == CATEGORICAL_KIND:
        codes = dataset.categorical(idx).present_codes()
        counts = np.bincount(codes)
    else:
        present = dataset.numeric(idx).present()
        _, counts = np.unique(present.astype(np.int64), return_counts=True)
    return counts[counts > 0]

def _pairwise_complete(dataset: Dataset, i: int, j: int) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    cx, cy = dataset.numeric(i), dataset.numeric(j)
    both = cx.mask & cy.mask
    return cx.values[both], cy.values[both], np.flatnonzero(both)


def evaluate_exact(
    dataset: Dataset, query: GuidepostQuery, indices: Tuple[int, ...]
) -> StrengthValue:
    name = query.descriptor
    if name == "dispersion":
        return desc.qcd(_exact_unary_values(dataset, name, indices[0]))
    if name == "skew":
        return desc.skewness(_exact_unary_values(dataset, name, indices[0]))
    if name == "heavy_tails":
        return desc.kurtosis(_exact_unary_values(dataset, name, indices[0]))
    if name == "outliers":
        return desc.tukey_outliers(_exact_unary_values(dataset, name, indices[0]))
    if name == "heterogeneous_frequencies":
        return desc.heterogeneity(_category_counts(dataset, indices[0]))
    x, y, _ = _pairwise_complete(dataset, indices[0], indices[1])
    if query.metric == SIGNIFICANCE_METRIC:
        return desc.significance_adjusted_pearson(x, y, query.alpha)
    return desc.pearson(x, y)


def _bundle_column(bundle: SketchBundle, idx: int) -> ColumnSketches:
    return bundle.columns[idx]


def _moment_strength(col: ColumnSketches, which: str) -> StrengthValue:
    if col.moments is None or col.n_present == 0:
        raise MetricUndefined("empty column")
    metrics = moments_to_metrics(col.moments)
    if which == "skew":
        if metrics.skewness is None:
            raise MetricUndefined("degenerate (constant column)")
        return StrengthValue(
            raw=metrics.skewness,
            strength=abs(metrics.skewness),
            auxiliary={"approximate": True},
        )
    if metrics.kurtosis is None:
        raise MetricUndefined("degenerate (constant column)")
    return StrengthValue(
        raw=metrics.kurtosis,
        strength=metrics.kurtosis,
        auxiliary={"approximate": True},
    )


def _significance_adjust(sv: StrengthValue, n: int, alpha: float) -> StrengthValue:
    p = desc.correlation_p_value(sv.raw, n)
    strength = sv.strength if p <= alpha else 0.0
    aux = dict(sv.auxiliary)
    aux.update({"p_value": p, "alpha": alpha, "n": int(n)})
    return StrengthValue(raw=sv.raw, strength=strength, auxiliary=aux)


def evaluate_approx(
    bundle: SketchBundle, query: GuidepostQuery, indices: Tuple[int, ...]
) -> StrengthValue:
    name = query.descriptor
    if name in ("skew", "heavy_tails"):
        return _moment_strength(_bundle_column(bundle, indices[0]), name)
    col = _bundle_column(bundle, indices[0])
    if name == "dispersion":
        if col.quantile is None:
            raise MetricUndefined("empty column")
        return approx_qcd(col.quantile)
    if name == "outliers":
        if col.quantile is None:
            raise MetricUndefined("empty column")
        return estimate_outlier_count(col.quantile)
    if name == "heterogeneous_frequencies":
        if col.heavy is None or col.reservoir is None or col.n_present == 0:
            raise MetricUndefined("empty column")
        return estimate_entropy(col.heavy, col.reservoir, col.n_present, col.distinct)
    cx = _bundle_column(bundle, indices[0])
    cy = _bundle_column(bundle, indices[1])
    if cx.hyperplane is None or cy.hyperplane is None:
        raise MetricUndefined("degenerate (constant column)")
    sv = approx_pearson(cx.hyperplane, cy.hyperplane)
    if query.metric == SIGNIFICANCE_METRIC:
        # Pairwise-complete counts are not kept in sketches; the smaller
        # column count is the closest available n for the t reference.
        sv = _significance_adjust(sv, min(cx.n_present, cy.n_present), query.alpha)
    return sv


# -- vectorized pairwise strengths -------------------------------------------


def _exact_rho_matrix(
    dataset: Dataset, cols: List[int]
) -> Tuple[np.ndarray, np.ndarray]:
    """(rho, n) matrices over the given numeric columns.

    Fully-present columns are handled with one matrix product; pairs
    involving missing cells fall back to pairwise-complete evaluation.
    """
    d = len(cols)
    rho = np.full((d, d), np.nan)
    n_mat = np.zeros((d, d), dtype=np.int64)
    full = [dataset.numeric(c).mask.all() for c in cols]
    dense = [p for p in range(d) if full[p]]
    if len(dense) >= 2:
        block = np.column_stack([dataset.numeric(cols[p]).values for p in dense])
        centered = block - block.mean(axis=0)
        cov = centered.T @ centered
        sd = np.sqrt(np.diag(cov))
        with np.errstate(invalid="ignore", divide="ignore"):
            sub = cov / np.outer(sd, sd)
        for a, pa in enumerate(dense):
            for b, pb in enumerate(dense):
                if a != b:
                    rho[pa, pb] = sub[a, b]
                    n_mat[pa, pb] = dataset.n
    for a in range(d):
        for b in range(a + 1, d):
            if full[a] and full[b]:
                continue
            x, y, _ = _pairwise_complete(dataset, cols[a], cols[b])
            n_mat[a, b] = n_mat[b, a] = x.size
            if x.size >= 3:
                try:
                    sv = desc.pearson(x, y)
                    rho[a, b] = rho[b, a] = sv.raw
                except MetricUndefined:
                    pass
    return rho, n_mat


def _approx_rho_matrix(bundle: SketchBundle, cols: List[int]) -> np.ndarray:
    sketches = [_bundle_column(bundle, c).hyperplane for c in cols]
    d = len(cols)
    rho = np.full((d, d), np.nan)
    have = [p for p in range(d) if sketches[p] is not None]
    if len(have) >= 2:
        k = sketches[have[0]].k
        bits = np.stack([sketches[p].bits for p in have])
        xor = bits[:, None, :] ^ bits[None, :, :]
        hamming = np.bitwise_count(xor).sum(axis=2)
        est = np.cos(np.pi * hamming / k)
        for a, pa in enumerate(have):
            for b, pb in enumerate(have):
                if a != b:
                    rho[pa, pb] = est[a, b]
    return rho


# -- payload construction ----------------------------------------------------


def _scaled_counts(counts: np.ndarray, target: int) -> List[int]:
    """Scale histogram counts to sum to ``target`` by largest remainder."""
    total = int(counts.sum())
    if total == 0:
        return [0] * counts.size
    exact = counts * (target / total)
    base = np.floor(exact).astype(np.int64)
    shortfall = target - int(base.sum())
    if shortfall > 0:
        frac = exact - base
        for pos in np.argsort(-frac, kind="stable")[:shortfall]:
            base[pos] += 1
    return [int(c) for c in base]


def _payload_exact(
    dataset: Dataset, query: GuidepostQuery, indices: Tuple[int, ...], seed: int
) -> VisualizationPayload:
    spec = get_descriptor(query.descriptor)
    if spec.chart == desc.HISTOGRAM:
        return desc.histogram_payload(dataset.numeric(indices[0]).present())
    if spec.chart == desc.BOXPLOT:
        return desc.boxplot_payload(dataset.numeric(indices[0]).present())
    if spec.chart == desc.PARETO:
        meta = dataset.meta(indices[0])
        if meta.kind == CATEGORICAL_KIND:
            col = dataset.categorical(indices[0])
            counts = np.bincount(col.present_codes())
            keep = np.flatnonzero(counts)
            labels = [col.categories[i] for i in keep]
            counts = counts[keep]
        else:
            keys, counts = np.unique(
                dataset.numeric(indices[0]).present().astype(np.int64), return_counts=True
            )
            labels = [str(int(k)) for k in keys]
        return desc.pareto_payload(labels, counts)
    x, y, rows = _pairwise_complete(dataset, indices[0], indices[1])
    return desc.scatter_payload(
        x, y, priorities=row_priorities(rows, seed) if x.size > desc.DEFAULT_SCATTER_POINTS else None
    )


def _payload_approx(
    bundle: SketchBundle, query: GuidepostQuery, indices: Tuple[int, ...], sv: StrengthValue
) -> VisualizationPayload:
    spec = get_descriptor(query.descriptor)
    if spec.chart == desc.HISTOGRAM:
        col = _bundle_column(bundle, indices[0])
        lo = col.quantile.quantile(0.0)
        hi = col.quantile.quantile(1.0)
        if lo == hi:
            return VisualizationPayload(
                desc.HISTOGRAM, {"bin_edges": [lo, hi], "counts": [col.n_present]}
            )
        counts, edges = np.histogram(
            col.reservoir.values, bins=desc.DEFAULT_HISTOGRAM_BINS, range=(lo, hi)
        )
        return VisualizationPayload(
            desc.HISTOGRAM,
            {
                "bin_edges": [float(e) for e in edges],
                "counts": _scaled_counts(counts, col.n_present),
            },
        )
    if spec.chart == desc.BOXPLOT:
        aux = sv.auxiliary
        sample = np.sort(_bundle_column(bundle, indices[0]).reservoir.values)
        outs = sample[(sample < aux["fence_low"]) | (sample > aux["fence_high"])]
        if outs.size > desc.MAX_STORED_OUTLIERS:
            half = desc.MAX_STORED_OUTLIERS // 2
            outs = np.concatenate([outs[:half], outs[-half:]])
        return VisualizationPayload(
            desc.BOXPLOT,
            {
                "min": aux["min"],
                "q1": aux["q1"],
                "median": aux["median"],
                "q3": aux["q3"],
                "max": aux["max"],
                "fence_low": aux["fence_low"],
                "fence_high": aux["fence_high"],
                "outliers": [float(v) for v in outs],
                "outlier_count": int(sv.raw),
            },
        )
    if spec.chart == desc.PARETO:
        col = _bundle_column(bundle, indices[0])
        items = col.heavy.items()
        labels = [col.labels.get(key, str(key)) for key, _ in items]
        counts = np.array([count for _, count in items], dtype=np.int64)
        return desc.pareto_payload(labels, counts, total=col.n_present)
    cx = _bundle_column(bundle, indices[0])
    cy = _bundle_column(bundle, indices[1])
    shared, ix, iy = np.intersect1d(
        cx.reservoir.rows, cy.reservoir.rows, return_indices=True
    )
    px = cx.reservoir.values[ix]
    py = cy.reservoir.values[iy]
    if shared.size > desc.DEFAULT_SCATTER_POINTS:
        keep = np.argsort(row_priorities(shared, bundle.config.seed), kind="stable")[
            : desc.DEFAULT_SCATTER_POINTS
        ]
        keep.sort()
        px, py = px[keep], py[keep]
    mx_metrics = moments_to_metrics(cx.moments)
    my_metrics = moments_to_metrics(cy.moments)
    if mx_metrics.std > 0:
        slope = sv.raw * my_metrics.std / mx_metrics.std
        intercept = my_metrics.mean - slope * mx_metrics.mean
    else:
        slope, intercept = 0.0, my_metrics.mean
    return VisualizationPayload(
        desc.SCATTER,
        {
            "x": [float(v) for v in px],
            "y": [float(v) for v in py],
            "slope": float(slope),
            "intercept": float(intercept),
        },
    )


# -- ranking ------------------------------------------------------------------


def _check_bundle(dataset: Dataset, bundle: Optional[SketchBundle]) -> SketchBundle:
    if bundle is None:
        raise EngineError("no sketch bundle available for approximate mode")
    if bundle.fingerprint != dataset.fingerprint:
        raise StaleBundleError("bundle fingerprint does not match dataset")
    return bundle


def _pair_strengths(
    dataset: Dataset,
    bundle: Optional[SketchBundle],
    query: GuidepostQuery,
    instset: InstanceSet,
) -> List[Tuple[Tuple[int, ...], StrengthValue]]:
    """Strengths for all admissible pairs, using one vectorized rho pass."""
    cols = sorted({i for inst in instset.instances for i in inst.indices})
    pos = {c: p for p, c in enumerate(cols)}
    if query.mode == APPROXIMATE:
        rho = _approx_rho_matrix(_check_bundle(dataset, bundle), cols)
        n_mat = None
    else:
        rho, n_mat = _exact_rho_matrix(dataset, cols)
    out = []
    for inst in instset.instances:
        if not inst.admissible:
            continue
        a, b = pos[inst.indices[0]], pos[inst.indices[1]]
        r = rho[a, b]
        if not np.isfinite(r):
            continue
        r = float(np.clip(r, -1.0, 1.0))
        if query.mode == APPROXIMATE:
            cx = _bundle_column(bundle, inst.indices[0])
            cy = _bundle_column(bundle, inst.indices[1])
            sv = StrengthValue(
                raw=r, strength=abs(r), auxiliary={"approximate": True}
            )
            n_pair = min(cx.n_present, cy.n_present)
        else:
            sv = StrengthValue(raw=r, strength=abs(r), auxiliary={})
            n_pair = int(n_mat[a, b])
        if query.metric == SIGNIFICANCE_METRIC:
            if n_pair <= 2:
                continue
            sv = _significance_adjust(sv, n_pair, query.alpha)
        out.append((inst.indices, sv))
    return out


def _evaluate_all(
    dataset: Dataset,
    bundle: Optional[SketchBundle],
    query: GuidepostQuery,
    instset: Optional[InstanceSet] = None,
) -> List[Tuple[Tuple[int, ...], StrengthValue]]:
    instset = instset or enumerate_instances(dataset, query.descriptor)
    if get_descriptor(query.descriptor).arity == 2:
        return _pair_strengths(dataset, bundle, query, instset)
    results = []
    if query.mode == APPROXIMATE:
        checked = _check_bundle(dataset, bundle)
    for inst in instset.instances:
        if not inst.admissible:
            continue
        try:
            if query.mode == APPROXIMATE:
                sv = evaluate_approx(checked, query, inst.indices)
            else:
                sv = evaluate_exact(dataset, query, inst.indices)
        except MetricUndefined:
            continue
        results.append((inst.indices, sv))
    return results


def _apply_filter(
    scored: List[Tuple[Tuple[int, ...], StrengthValue]], query: GuidepostQuery
) -> List[Tuple[Tuple[int, ...], StrengthValue]]:
    lo = query.min_strength
    hi = query.max_strength
    if lo is None and hi is None:
        return scored
    return [
        (idx, sv)
        for idx, sv in scored
        if (lo is None or sv.strength >= lo) and (hi is None or sv.strength <= hi)
    ]


def _sorted_instances(
    scored: List[Tuple[Tuple[int, ...], StrengthValue]], order: str
) -> List[Tuple[Tuple[int, ...], StrengthValue]]:
    if order == DESCENDING:
        return sorted(scored, key=lambda item: (-item[1].strength, item[0]))
    return sorted(scored, key=lambda item: (item[1].strength, item[0]))


def _build_guidepost(
    dataset: Dataset,
    bundle: Optional[SketchBundle],
    query: GuidepostQuery,
    indices: Tuple[int, ...],
    sv: StrengthValue,
    display_indices: Optional[Tuple[int, ...]] = None,
) -> Guidepost:
    shown = display_indices or indices
    try:
        if query.mode == APPROXIMATE:
            payload = _payload_approx(bundle, query, shown, sv)
        else:
            seed = bundle.config.seed if bundle is not None else 42
            payload = _payload_exact(dataset, query, shown, seed)
    except MetricUndefined:
        payload = None
    return Guidepost(
        id=guidepost_id(dataset.fingerprint, query.descriptor, indices),
        descriptor=query.descriptor,
        indices=tuple(int(i) for i in shown),
        names=tuple(dataset.columns[i].name for i in shown),
        value=sv,
        payload=payload,
        approximate=query.mode == APPROXIMATE,
    )


def rank_guideposts(
    dataset: Dataset, bundle: Optional[SketchBundle], query: GuidepostQuery
) -> List[Guidepost]:
    scored = _apply_filter(_evaluate_all(dataset, bundle, query), query)
    ranked = _sorted_instances(scored, query.order)[: query.k]
    return [
        _build_guidepost(dataset, bundle, query, indices, sv) for indices, sv in ranked
    ]


# -- neighborhoods -------------------------------------------------------------


def related_guideposts(
    dataset: Dataset,
    bundle: Optional[SketchBundle],
    descriptor: str,
    indices: Tuple[int, ...],
    k: int = 5,
    mode: str = EXACT,
    min_strength: Optional[float] = None,
    max_strength: Optional[float] = None,
    metric: Optional[str] = None,
    alpha: float = DEFAULT_ALPHA,
) -> NeighborhoodResult:
    """Neighborhood of a focused guidepost.

    For a pair focus (x, y): N_x ranks pairs that keep x fixed, N_y pairs
    that keep y fixed, and N_xy the strongest of their union. A unary focus
    on column x yields the top correlated pairs (x, y) in N_x, an empty
    N_y, and N_xy = N_x. Guideposts in the lists display the fixed column
    first; ids use the canonical column order.
    """
    pair_query = GuidepostQuery(
        descriptor="linear_relationship",
        metric=metric,
        k=max(k, 1),
        mode=mode,
        min_strength=min_strength,
        max_strength=max_strength,
        alpha=alpha,
    )
    spec = get_descriptor(descriptor)
    instset = enumerate_instances(dataset, descriptor)
    by_indices = {inst.indices: inst for inst in instset.instances}
    focus = by_indices.get(tuple(sorted(indices)))
    if focus is None or not focus.admissible:
        reason = focus.reason if focus is not None else "not an instance"
        raise EngineError(f"focus tuple no longer admissible: {reason}")

    pair_set = enumerate_instances(dataset, "linear_relationship")
    scored = _apply_filter(
        _pair_strengths(dataset, bundle, pair_query, pair_set), pair_query
    )
    by_pair = {idx: sv for idx, sv in scored}

    def neighborhood(fixed: int, exclude: Optional[int]) -> List[Guidepost]:
        candidates = []
        for (i, j), sv in by_pair.items():
            if fixed not in (i, j):
                continue
            other = j if i == fixed else i
            if exclude is not None and other == exclude:
                continue
            candidates.append(((i, j), sv, other))
        candidates.sort(key=lambda item: (-item[1].strength, item[0]))
        out = []
        for (i, j), sv, other in candidates[:k]:
            out.append(
                _build_guidepost(
                    dataset,
                    bundle,
                    pair_query,
                    (i, j),
                    sv,
                    display_indices=(fixed, other),
                )
            )
        return out

    if spec.arity == 2:
        x, y = focus.indices
        n_x = neighborhood(x, y)
        n_y = neighborhood(y, x)
    else:
        x = focus.indices[0]
        n_x = neighborhood(x, None) if x in {c for pair in by_pair for c in pair} else []
        n_y = []

    union: Dict[str, Guidepost] = {}
    for g in n_x + n_y:
        union.setdefault(g.id, g)
    n_xy = sorted(
        union.values(), key=lambda g: (-g.value.strength, tuple(sorted(g.indices)))
    )[:k]
    return NeighborhoodResult(
        focus_id=guidepost_id(dataset.fingerprint, descriptor, focus.indices),
        descriptor=descriptor,
        focus_indices=focus.indices,
        n_x=n_x,
        n_y=n_y,
        n_xy=n_xy,
    )


# -- overview -------------------------------------------------------------------


def overview(
    dataset: Dataset,
    bundle: Optional[SketchBundle],
    descriptor: str,
    mode: str = EXACT,
) -> dict:
    """Strengths over the whole instance set; excluded entries are null."""
    spec = get_descriptor(descriptor)
    query = GuidepostQuery(descriptor=descriptor, mode=mode)
    instset = enumerate_instances(dataset, descriptor)

    if spec.arity == 1:
        strengths = {}
        for idx, sv in _evaluate_all(dataset, bundle, query, instset):
            strengths[idx[0]] = sv
        columns = []
        values = []
        raws = []
        excluded = []
        for inst in instset.instances:
            idx = inst.indices[0]
            columns.append({"index": idx, "name": dataset.columns[idx].name})
            sv = strengths.get(idx)
            values.append(None if sv is None else float(sv.strength))
            raws.append(None if sv is None else float(sv.raw))
            excluded.append(inst.reason if not inst.admissible else None)
        return {
            "descriptor": descriptor,
            "arity": 1,
            "mode": mode,
            "columns": columns,
            "strengths": values,
            "raw": raws,
            "excluded": excluded,
        }

    cols = sorted({i for inst in instset.instances for i in inst.indices})
    if not cols:
        cols = dataset.numeric_indices()
    if mode == EXACT and len(cols) > MAX_EXACT_OVERVIEW_COLUMNS:
        raise OverviewTooLargeError(
            f"exact overview refused for {len(cols)} columns "
            f"(limit {MAX_EXACT_OVERVIEW_COLUMNS}); use approximate mode"
        )
    scored = dict(_pair_strengths(dataset, bundle, query, instset))
    size = len(cols)
    pos = {c: p for p, c in enumerate(cols)}
    matrix: List[List[Optional[float]]] = [[None] * size for _ in range(size)]
    raw_matrix: List[List[Optional[float]]] = [[None] * size for _ in range(size)]
    for inst in instset.instances:
        sv = scored.get(inst.indices)
        if sv is None:
            continue
        a, b = pos[inst.indices[0]], pos[inst.indices[1]]
        matrix[a][b] = matrix[b][a] = float(sv.strength)
        raw_matrix[a][b] = raw_matrix[b][a] = float(sv.raw)
    return {
        "descriptor": descriptor,
        "arity": 2,
        "mode": mode,
        "columns": [{"index": c, "name": dataset.columns[c].name} for c in cols],
        "matrix": matrix,
        "raw": raw_matrix,
    }
