"""HTTP/JSON facade over datasets, sketches, and the query engine.

All successful responses are serialized through the canonical JSON encoder
(same bytes as the CLI). Sketch bundles build in the background after
ingest; guidepost endpoints answer 409 for approximate-mode queries until
the bundle is ready, while exact mode is served immediately.

Configuration comes from environment variables (overridable via
ServiceConfig): GUIDEPOST_DATA_DIR, GUIDEPOST_SIZE_CAP (bytes),
GUIDEPOST_SYNC_BUILD (build bundles inline, for tests/scripts),
GUIDEPOST_UI_DIR (static UI mount), and the sketch knobs GUIDEPOST_K,
GUIDEPOST_EPSILON, GUIDEPOST_HEAVY_CAPACITY, GUIDEPOST_RESERVOIR,
GUIDEPOST_SEED, GUIDEPOST_CARDINALITY_CAP.
"""
from __future__ import annotations

import os
import threading
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, Optional, Tuple

from fastapi import FastAPI, Request, Response
from fastapi.exceptions import RequestValidationError
from pydantic import ValidationError

from .. import engine
from ..dataset import Dataset, DatasetError, IngestError, RowPredicate, ingest_csv
from ..descriptors import MetricUndefined
from ..jsonio import canonical_bytes
from ..registry import Registry
from ..session import SessionError, SessionState
from ..sketch import SketchConfig, build_bundle
from . import presenters
from .schemas import (
    IngestResponse,
    RowPageResponse,
    SessionCreateRequest,
    SessionCreateResponse,
    SessionModel,
)

DEFAULT_SIZE_CAP = 1 << 30  # 1 GB
MAX_ROW_LIMIT = 10_000


class ApiError(Exception):
    def __init__(self, status: int, code: str, message: str):
        super().__init__(message)
        self.status = status
        self.code = code
        self.message = message


@dataclass
class ServiceConfig:
    data_dir: str = "./guidepost_data"
    size_cap: int = DEFAULT_SIZE_CAP
    sync_build: bool = False
    ui_dir: Optional[str] = None
    sketch: SketchConfig = field(default_factory=SketchConfig)

    @classmethod
    def from_env(cls) -> "ServiceConfig":
        env = os.environ
        sketch = SketchConfig(
            hyperplane_bits=int(env.get("GUIDEPOST_K", 1024)),
            quantile_epsilon=float(env.get("GUIDEPOST_EPSILON", 0.005)),
            heavy_hitter_capacity=int(env.get("GUIDEPOST_HEAVY_CAPACITY", 256)),
            reservoir_capacity=int(env.get("GUIDEPOST_RESERVOIR", 4096)),
            seed=int(env.get("GUIDEPOST_SEED", 42)),
            cardinality_cap=int(env.get("GUIDEPOST_CARDINALITY_CAP", 10000)),
        )
        return cls(
            data_dir=env.get("GUIDEPOST_DATA_DIR", "./guidepost_data"),
            size_cap=int(env.get("GUIDEPOST_SIZE_CAP", DEFAULT_SIZE_CAP)),
            sync_build=env.get("GUIDEPOST_SYNC_BUILD", "") == "1",
            ui_dir=env.get("GUIDEPOST_UI_DIR") or None,
            sketch=sketch,
        )


def _respond(model, status: int = 200) -> Response:
    return Response(
        content=canonical_bytes(model.model_dump(mode="json")),
        status_code=status,
        media_type="application/json",
    )


def _error(status: int, code: str, message: str) -> Response:
    return Response(
        content=canonical_bytes({"error": {"code": code, "message": message}}),
        status_code=status,
        media_type="application/json",
    )


class BundleTracker:
    """Remembers which datasets have a sketch build in flight or failed."""

    def __init__(self) -> None:
        self._lock = threading.Lock()
        self._building: set = set()
        self._failed: Dict[str, str] = {}

    def start(self, dataset_id: str) -> bool:
        with self._lock:
            if dataset_id in self._building:
                return False
            self._building.add(dataset_id)
            self._failed.pop(dataset_id, None)
            return True

    def finish(self, dataset_id: str, error: Optional[str] = None) -> None:
        with self._lock:
            self._building.discard(dataset_id)
            if error is not None:
                self._failed[dataset_id] = error

    def status(self, dataset_id: str, ready: bool) -> str:
        if ready:
            return "ready"
        with self._lock:
            if dataset_id in self._building:
                return "building"
            if dataset_id in self._failed:
                return "failed"
        return "building"


def create_app(
    registry: Optional[Registry] = None, config: Optional[ServiceConfig] = None
) -> FastAPI:
    config = config or ServiceConfig.from_env()
    registry = registry or Registry(config.data_dir)
    app = FastAPI(title="guidepost", docs_url=None, redoc_url=None, openapi_url=None)
    app.state.registry = registry
    app.state.config = config
    tracker = BundleTracker()
    gid_index_cache: Dict[str, Dict[str, Tuple[str, Tuple[int, ...]]]] = {}
    session_locks: Dict[str, threading.Lock] = {}
    locks_guard = threading.Lock()

    @app.exception_handler(ApiError)
    async def handle_api_error(_request, exc: ApiError):
        return _error(exc.status, exc.code, exc.message)

    @app.exception_handler(RequestValidationError)
    async def handle_validation(_request, exc: RequestValidationError):
        return _error(400, "invalid_query", str(exc.errors()[0].get("msg", "invalid request")))

    def check_params(request: Request, allowed: set) -> None:
        unknown = sorted(set(request.query_params) - allowed)
        if unknown:
            raise ApiError(400, "unknown_parameter", f"unknown query parameters: {unknown}")

    def get_dataset(dataset_id: str) -> Dataset:
        try:
            return registry.load_dataset(dataset_id)
        except KeyError:
            raise ApiError(404, "unknown_dataset", f"unknown dataset {dataset_id!r}")

    def get_bundle_or_409(dataset_id: str):
        bundle = registry.load_bundle(dataset_id)
        if bundle is None:
            status = tracker.status(dataset_id, ready=False)
            if status == "failed":
                raise ApiError(409, "bundle_failed", "bundle build failed; re-ingest to retry")
            raise ApiError(409, "bundle_building", "bundle building")
        return bundle

    def build_in_background(dataset: Dataset) -> None:
        def run() -> None:
            try:
                bundle = build_bundle(dataset, config.sketch)
                registry.save_bundle(dataset.id, bundle)
                tracker.finish(dataset.id)
            except Exception as exc:  # pragma: no cover - defensive
                tracker.finish(dataset.id, error=str(exc))

        threading.Thread(target=run, daemon=True).start()

    def gid_index(dataset: Dataset) -> Dict[str, Tuple[str, Tuple[int, ...]]]:
        cached = gid_index_cache.get(dataset.id)
        if cached is None:
            cached = {}
            for name in engine.DESCRIPTOR_ORDER:
                for inst in engine.enumerate_instances(dataset, name).instances:
                    gid = engine.guidepost_id(dataset.fingerprint, name, inst.indices)
                    cached[gid] = (name, inst.indices)
            gid_index_cache[dataset.id] = cached
        return cached

    def session_lock(session_id: str) -> threading.Lock:
        with locks_guard:
            return session_locks.setdefault(session_id, threading.Lock())

    def parse_query(request: Request, dataset: Dataset) -> engine.GuidepostQuery:
        params = request.query_params
        if "descriptor" not in params:
            raise ApiError(400, "invalid_query", "descriptor parameter is required")
        if "alpha" in params and params.get("metric") != engine.SIGNIFICANCE_METRIC:
            raise ApiError(
                400, "invalid_query", "alpha requires metric=significance_adjusted"
            )
        try:
            return engine.GuidepostQuery(
                descriptor=params["descriptor"],
                metric=params.get("metric"),
                order=params.get("order"),
                k=int(params.get("k", engine.DEFAULT_K)),
                min_strength=float(params["min"]) if "min" in params else None,
                max_strength=float(params["max"]) if "max" in params else None,
                mode=params.get("mode", engine.EXACT),
                alpha=float(params.get("alpha", engine.DEFAULT_ALPHA)),
            )
        except (ValueError, MetricUndefined) as exc:
            raise ApiError(400, "invalid_query", str(exc))

    # -- endpoints ---------------------------------------------------------

    @app.post("/datasets")
    async def post_dataset(request: Request):
        check_params(request, set())
        content_type = request.headers.get("content-type", "")
        if content_type.startswith("multipart/"):
            form = await request.form()
            upload = form.get("file")
            if upload is None:
                raise ApiError(400, "invalid_upload", "multipart upload needs a 'file' field")
            raw = await upload.read()
        else:
            raw = await request.body()
        if len(raw) > config.size_cap:
            raise ApiError(
                413, "dataset_too_large", f"dataset exceeds size cap of {config.size_cap} bytes"
            )
        if not raw:
            raise ApiError(400, "invalid_upload", "empty upload")
        try:
            dataset = ingest_csv(raw)
        except IngestError as exc:
            raise ApiError(400, "ingest_error", str(exc))
        registry.add_dataset(dataset)
        if registry.bundle_ready(dataset.id):
            status = "ready"
        elif config.sync_build:
            registry.save_bundle(dataset.id, build_bundle(dataset, config.sketch))
            status = "ready"
        else:
            if tracker.start(dataset.id):
                build_in_background(dataset)
            status = tracker.status(dataset.id, ready=False)
        return _respond(
            IngestResponse(
                dataset_id=dataset.id,
                n_rows=dataset.n,
                columns=presenters.column_meta_models(dataset),
                bundle_status=status,
            ),
            status=201,
        )

    @app.get("/datasets/{dataset_id}/columns")
    async def get_columns(dataset_id: str, request: Request):
        check_params(request, set())
        dataset = get_dataset(dataset_id)
        return _respond(presenters.columns_response(dataset))

    @app.get("/datasets/{dataset_id}/guideposts")
    async def get_guideposts(dataset_id: str, request: Request):
        check_params(
            request,
            {"descriptor", "metric", "order", "k", "min", "max", "mode", "alpha"},
        )
        dataset = get_dataset(dataset_id)
        query = parse_query(request, dataset)
        bundle = None
        if query.mode == engine.APPROXIMATE:
            bundle = get_bundle_or_409(dataset_id)
        else:
            bundle = registry.load_bundle(dataset_id)
        try:
            ranked = engine.rank_guideposts(dataset, bundle, query)
        except MetricUndefined as exc:
            raise ApiError(400, "invalid_query", str(exc))
        return _respond(presenters.guidepost_list_response(dataset, query, ranked))

    @app.get("/datasets/{dataset_id}/guideposts/{gid}/related")
    async def get_related(dataset_id: str, gid: str, request: Request):
        check_params(request, {"k", "mode"})
        dataset = get_dataset(dataset_id)
        params = request.query_params
        mode = params.get("mode", engine.EXACT)
        if mode not in (engine.EXACT, engine.APPROXIMATE):
            raise ApiError(400, "invalid_query", f"mode must be 'exact' or 'approximate'")
        try:
            k = int(params.get("k", 5))
        except ValueError:
            raise ApiError(400, "invalid_query", "k must be an integer")
        if k < 1:
            raise ApiError(400, "invalid_query", "k must be >= 1")
        focus = gid_index(dataset).get(gid)
        if focus is None:
            raise ApiError(404, "unknown_guidepost", f"unknown guidepost id {gid!r}")
        bundle = (
            get_bundle_or_409(dataset_id)
            if mode == engine.APPROXIMATE
            else registry.load_bundle(dataset_id)
        )
        try:
            result = engine.related_guideposts(
                dataset, bundle, focus[0], focus[1], k=k, mode=mode
            )
        except engine.EngineError as exc:
            raise ApiError(400, "focus_not_admissible", str(exc))
        return _respond(presenters.neighborhood_response(dataset, result))

    @app.get("/datasets/{dataset_id}/overview")
    async def get_overview(dataset_id: str, request: Request):
        check_params(request, {"descriptor", "mode"})
        dataset = get_dataset(dataset_id)
        params = request.query_params
        descriptor = params.get("descriptor")
        if descriptor is None:
            raise ApiError(400, "invalid_query", "descriptor parameter is required")
        mode = params.get("mode", engine.EXACT)
        if mode not in (engine.EXACT, engine.APPROXIMATE):
            raise ApiError(400, "invalid_query", "mode must be 'exact' or 'approximate'")
        bundle = (
            get_bundle_or_409(dataset_id)
            if mode == engine.APPROXIMATE
            else registry.load_bundle(dataset_id)
        )
        try:
            doc = engine.overview(dataset, bundle, descriptor, mode)
        except engine.OverviewTooLargeError as exc:
            raise ApiError(400, "overview_too_large", str(exc))
        except MetricUndefined as exc:
            raise ApiError(400, "invalid_query", str(exc))
        return _respond(presenters.overview_response(dataset, doc))

    @app.get("/datasets/{dataset_id}/rows")
    async def get_rows(dataset_id: str, request: Request):
        check_params(request, {"col", "op", "value", "limit", "offset"})
        dataset = get_dataset(dataset_id)
        params = request.query_params
        try:
            limit = int(params.get("limit", 100))
            offset = int(params.get("offset", 0))
        except ValueError:
            raise ApiError(400, "invalid_query", "limit and offset must be integers")
        if not (1 <= limit <= MAX_ROW_LIMIT) or offset < 0:
            raise ApiError(
                400, "invalid_query", f"limit must be in [1, {MAX_ROW_LIMIT}] and offset >= 0"
            )
        predicate = None
        filter_keys = {"col", "op", "value"} & set(params)
        if filter_keys:
            if filter_keys != {"col", "op", "value"}:
                raise ApiError(
                    400, "invalid_query", "row filters need col, op, and value together"
                )
            predicate = _parse_predicate(dataset, params["col"], params["op"], params["value"])
        try:
            page = dataset.get_rows(predicate, limit=limit, offset=offset)
        except DatasetError as exc:
            raise ApiError(400, "invalid_query", str(exc))
        return _respond(
            RowPageResponse(
                dataset_id=dataset.id,
                columns=page.columns,
                rows=page.rows,
                total=page.total,
                offset=page.offset,
                limit=page.limit,
            )
        )

    @app.post("/sessions")
    async def post_session(request: Request):
        check_params(request, set())
        try:
            body = SessionCreateRequest.model_validate_json(await request.body())
        except ValidationError as exc:
            raise ApiError(400, "invalid_session", exc.errors()[0].get("msg", "invalid body"))
        if not registry.has_dataset(body.dataset_id):
            raise ApiError(404, "unknown_dataset", f"unknown dataset {body.dataset_id!r}")
        state = SessionState(dataset_id=body.dataset_id)
        session_id = registry.create_session(state)
        return _respond(
            SessionCreateResponse(session_id=session_id, session=presenters.session_model(state)),
            status=201,
        )

    @app.get("/sessions/{session_id}")
    async def get_session(session_id: str, request: Request):
        check_params(request, set())
        try:
            state = registry.load_session(session_id)
        except KeyError:
            raise ApiError(404, "unknown_session", f"unknown session {session_id!r}")
        except SessionError as exc:
            raise ApiError(500, "corrupt_session", str(exc))
        return _respond(presenters.session_model(state))

    @app.put("/sessions/{session_id}")
    async def put_session(session_id: str, request: Request):
        check_params(request, set())
        if not registry.has_session(session_id):
            raise ApiError(404, "unknown_session", f"unknown session {session_id!r}")
        try:
            model = SessionModel.model_validate_json(await request.body())
        except ValidationError as exc:
            raise ApiError(400, "invalid_session", exc.errors()[0].get("msg", "invalid body"))
        if not registry.has_dataset(model.dataset_id):
            raise ApiError(404, "unknown_dataset", f"unknown dataset {model.dataset_id!r}")
        dataset = get_dataset(model.dataset_id)
        index = gid_index(dataset)
        for bookmark in model.bookmarks:
            if bookmark.guidepost_id not in index:
                raise ApiError(
                    400,
                    "unknown_guidepost",
                    f"bookmark references unknown guidepost {bookmark.guidepost_id!r}",
                )
        if model.focus is not None and model.focus not in index:
            raise ApiError(400, "unknown_guidepost", f"unknown focus {model.focus!r}")
        try:
            state = presenters.session_state(model)
        except SessionError as exc:
            raise ApiError(400, "invalid_session", str(exc))
        with session_lock(session_id):
            registry.save_session(session_id, state)
        return _respond(presenters.session_model(state))

    ui_dir = config.ui_dir
    if ui_dir and Path(ui_dir).is_dir():
        from fastapi.staticfiles import StaticFiles

        app.mount("/ui", StaticFiles(directory=ui_dir, html=True), name="ui")

    return app


def _parse_predicate(dataset: Dataset, col: str, op: str, value: str) -> RowPredicate:
    try:
        index = dataset.column_index(col)
    except DatasetError:
        raise ApiError(400, "invalid_query", f"unknown column {col!r}")
    if op == "range":
        parts = value.split(":", 1)
        if len(parts) != 2:
            raise ApiError(400, "invalid_query", "range filter value must be 'low:high'")
        try:
            low = float(parts[0]) if parts[0] != "" else None
            high = float(parts[1]) if parts[1] != "" else None
        except ValueError:
            raise ApiError(400, "invalid_query", "range bounds must be numbers")
        if low is not None and high is not None and low > high:
            raise ApiError(400, "invalid_query", "invalid filter range")
        return RowPredicate(column=index, op="range", value=low, high=high)
    if op not in ("eq", "gt", "ge", "lt", "le"):
        raise ApiError(400, "invalid_query", f"unknown row filter op {op!r}")
    return RowPredicate(column=index, op=op, value=value)
