"""Single-pass, mergeable per-column synopses and their composition rules."""

from .moments import MomentSketch, moments_to_metrics
from .quantile import QuantileSketch
from .heavy_hitters import HeavyHittersSketch
from .reservoir import ReservoirSample
from .hyperplane import HyperplaneSketch, approx_pearson, build_hyperplane_sketches
from .bundle import SketchBundle, SketchConfig, build_bundle, merge_bundles
from .estimators import (
    approx_qcd,
    chao1_distinct,
    estimate_entropy,
    estimate_outlier_count,
)

__all__ = [
    "MomentSketch",
    "QuantileSketch",
    "HeavyHittersSketch",
    "ReservoirSample",
    "HyperplaneSketch",
    "SketchBundle",
    "SketchConfig",
    "approx_pearson",
    "approx_qcd",
    "build_bundle",
    "build_hyperplane_sketches",
    "chao1_distinct",
    "estimate_entropy",
    "estimate_outlier_count",
    "merge_bundles",
    "moments_to_metrics",
]
