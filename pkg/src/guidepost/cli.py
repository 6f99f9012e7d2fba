"""Command-line entry points: ingest, sketch, rank, related, overview, serve.

Commands operate on a file-system registry directory shared with the HTTP
service (--registry, or GUIDEPOST_DATA_DIR). Results go to stdout as
canonical JSON — the same bytes the service would send for the equivalent
request — and diagnostics go to stderr.
"""
from __future__ import annotations

import os
import sys
import time
from pathlib import Path

import click

from . import engine
from .dataset import IngestError, IngestOptions, ingest_csv
from .descriptors import MetricUndefined
from .jsonio import canonical_dumps
from .registry import Registry
from .service import presenters
from .sketch import SketchConfig, build_bundle


def _default_registry() -> str:
    return os.environ.get("GUIDEPOST_DATA_DIR", "./guidepost_data")


def _emit(model) -> None:
    sys.stdout.write(canonical_dumps(model.model_dump(mode="json")) + "\n")


def _open_registry(path: str) -> Registry:
    return Registry(path)


def _load_dataset(registry: Registry, dataset_id: str):
    try:
        return registry.load_dataset(dataset_id)
    except KeyError:
        raise click.ClickException(f"unknown dataset id {dataset_id!r}")


def _load_bundle(registry: Registry, dataset_id: str, mode: str):
    bundle = registry.load_bundle(dataset_id)
    if mode == engine.APPROXIMATE and bundle is None:
        raise click.ClickException(
            "no sketch bundle for this dataset; run 'guidepost sketch' first"
        )
    return bundle


@click.group()
def main() -> None:
    """Ranked-visualization recommendations for tabular data."""


@main.command()
@click.argument("file", type=click.Path(exists=True, dir_okay=False, allow_dash=True))
@click.option("--out", "registry_dir", default=None, help="Registry directory.")
@click.option("--delimiter", default=",", show_default=True)
@click.option("--no-header", is_flag=True, help="Treat the first row as data.")
def ingest(file: str, registry_dir: str, delimiter: str, no_header: bool) -> None:
    """Ingest a CSV file and print its dataset id and column summary."""
    registry = _open_registry(registry_dir or _default_registry())
    raw = sys.stdin.buffer.read() if file == "-" else Path(file).read_bytes()
    try:
        dataset = ingest_csv(
            raw, IngestOptions(delimiter=delimiter, has_header=not no_header)
        )
    except IngestError as exc:
        raise click.ClickException(str(exc))
    registry.add_dataset(dataset)
    click.echo(f"ingested {dataset.n} rows into {registry.dataset_dir(dataset.id)}", err=True)
    _emit(presenters.columns_response(dataset))


@main.command()
@click.argument("dataset_id")
@click.option("--registry", "registry_dir", default=None, help="Registry directory.")
@click.option("--k", default=1024, show_default=True, help="Hyperplane signature bits.")
@click.option("--epsilon", default=0.005, show_default=True, help="Quantile rank error.")
@click.option("--seed", default=42, show_default=True)
@click.option("--s", "heavy", default=256, show_default=True, help="Heavy-hitter counters.")
@click.option("--r", "reservoir", default=4096, show_default=True, help="Reservoir size.")
def sketch(dataset_id, registry_dir, k, epsilon, seed, heavy, reservoir) -> None:
    """Build and persist the sketch bundle for a dataset."""
    registry = _open_registry(registry_dir or _default_registry())
    dataset = _load_dataset(registry, dataset_id)
    try:
        config = SketchConfig(
            hyperplane_bits=k,
            quantile_epsilon=epsilon,
            heavy_hitter_capacity=heavy,
            reservoir_capacity=reservoir,
            seed=seed,
        )
    except ValueError as exc:
        raise click.ClickException(str(exc))
    started = time.perf_counter()
    bundle = build_bundle(dataset, config)
    elapsed = time.perf_counter() - started
    path = registry.save_bundle(dataset_id, bundle)
    size = path.stat().st_size
    click.echo(f"built bundle in {elapsed:.2f}s ({size} bytes) at {path}", err=True)
    sys.stdout.write(
        canonical_dumps(
            {"dataset_id": dataset_id, "bytes": size, "seconds": round(elapsed, 4)}
        )
        + "\n"
    )


def _mode_options(fn):
    fn = click.option(
        "--approx", "mode", flag_value=engine.APPROXIMATE, help="Evaluate from sketches."
    )(fn)
    fn = click.option(
        "--exact",
        "mode",
        flag_value=engine.EXACT,
        default=True,
        help="Evaluate from full columns (default).",
    )(fn)
    return fn


@main.command()
@click.argument("dataset_id")
@click.option("--registry", "registry_dir", default=None, help="Registry directory.")
@click.option("--descriptor", required=True)
@click.option("--metric", default=None)
@click.option("--order", default=None, type=click.Choice(["ascending", "descending"]))
@click.option("--k", default=engine.DEFAULT_K, show_default=True)
@click.option("--min", "min_strength", default=None, type=float)
@click.option("--max", "max_strength", default=None, type=float)
@click.option("--alpha", default=None, type=float)
@_mode_options
def rank(
    dataset_id,
    registry_dir,
    descriptor,
    metric,
    order,
    k,
    min_strength,
    max_strength,
    alpha,
    mode,
) -> None:
    """Rank guideposts for one descriptor; JSON list to stdout."""
    if alpha is not None and metric != engine.SIGNIFICANCE_METRIC:
        raise click.ClickException("--alpha requires --metric significance_adjusted")
    registry = _open_registry(registry_dir or _default_registry())
    dataset = _load_dataset(registry, dataset_id)
    bundle = _load_bundle(registry, dataset_id, mode)
    try:
        query = engine.GuidepostQuery(
            descriptor=descriptor,
            metric=metric,
            order=order,
            k=k,
            min_strength=min_strength,
            max_strength=max_strength,
            mode=mode,
            alpha=alpha if alpha is not None else engine.DEFAULT_ALPHA,
        )
        ranked = engine.rank_guideposts(dataset, bundle, query)
    except (ValueError, MetricUndefined, engine.EngineError) as exc:
        raise click.ClickException(str(exc))
    _emit(presenters.guidepost_list_response(dataset, query, ranked))


@main.command()
@click.argument("dataset_id")
@click.option("--registry", "registry_dir", default=None, help="Registry directory.")
@click.option("--focus", required=True, help="Guidepost id to explore around.")
@click.option("--k", default=5, show_default=True)
@_mode_options
def related(dataset_id, registry_dir, focus, k, mode) -> None:
    """Neighborhood of a focused guidepost; JSON to stdout."""
    registry = _open_registry(registry_dir or _default_registry())
    dataset = _load_dataset(registry, dataset_id)
    bundle = _load_bundle(registry, dataset_id, mode)
    try:
        descriptor, indices = engine.resolve_guidepost(dataset, focus)
        result = engine.related_guideposts(
            dataset, bundle, descriptor, indices, k=k, mode=mode
        )
    except engine.UnknownGuidepostError as exc:
        raise click.ClickException(str(exc))
    except (ValueError, engine.EngineError) as exc:
        raise click.ClickException(str(exc))
    _emit(presenters.neighborhood_response(dataset, result))


@main.command()
@click.argument("dataset_id")
@click.option("--registry", "registry_dir", default=None, help="Registry directory.")
@click.option("--descriptor", required=True)
@_mode_options
def overview(dataset_id, registry_dir, descriptor, mode) -> None:
    """Strengths over the whole instance set; JSON matrix or vector."""
    registry = _open_registry(registry_dir or _default_registry())
    dataset = _load_dataset(registry, dataset_id)
    bundle = _load_bundle(registry, dataset_id, mode)
    try:
        doc = engine.overview(dataset, bundle, descriptor, mode)
    except (MetricUndefined, engine.EngineError) as exc:
        raise click.ClickException(str(exc))
    _emit(presenters.overview_response(dataset, doc))


@main.command()
@click.option("--addr", default="127.0.0.1:8000", show_default=True, help="host:port")
@click.option("--registry", "registry_dir", default=None, help="Registry directory.")
def serve(addr: str, registry_dir: str) -> None:
    """Run the HTTP service."""
    import uvicorn

    from .service import ServiceConfig, create_app

    host, _, port_text = addr.rpartition(":")
    if not host or not port_text.isdigit():
        raise click.ClickException("--addr must look like host:port")
    config = ServiceConfig.from_env()
    if registry_dir:
        config.data_dir = registry_dir
    app = create_app(config=config)
    uvicorn.run(app, host=host, port=int(port_text))


if __name__ == "__main__":
    main()
