"""Response/request models for the HTTP service.

The CLI builds the same models and serializes them through the shared
canonical JSON encoder, so both front ends emit byte-identical documents
for the same logical query.
"""
from __future__ import annotations

from typing import Any, Dict, List, Optional

from pydantic import BaseModel, ConfigDict, Field


class ColumnMetaModel(BaseModel):
    index: int
    name: str
    kind: str
    missing_count: int
    distinct_count: Optional[int] = None
    integer_valued: bool = False


class ColumnRef(BaseModel):
    index: int
    name: str


class IngestResponse(BaseModel):
    dataset_id: str
    n_rows: int
    columns: List[ColumnMetaModel]
    bundle_status: str


class ColumnsResponse(BaseModel):
    dataset_id: str
    n_rows: int
    columns: List[ColumnMetaModel]


class GuidepostModel(BaseModel):
    id: str
    descriptor: str
    columns: List[ColumnRef]
    raw: float
    strength: float
    auxiliary: Dict[str, Any] = Field(default_factory=dict)
    approximate: bool = False
    payload: Optional[Dict[str, Any]] = None


class GuidepostListResponse(BaseModel):
    dataset_id: str
    descriptor: str
    metric: str
    order: str
    mode: str
    k: int
    guideposts: List[GuidepostModel]


class NeighborhoodResponse(BaseModel):
    dataset_id: str
    focus_id: str
    descriptor: str
    focus_columns: List[int]
    n_x: List[GuidepostModel]
    n_y: List[GuidepostModel]
    n_xy: List[GuidepostModel]


class VectorOverviewResponse(BaseModel):
    dataset_id: str
    descriptor: str
    arity: int
    mode: str
    columns: List[ColumnRef]
    strengths: List[Optional[float]]
    raw: List[Optional[float]]
    excluded: List[Optional[str]]


class MatrixOverviewResponse(BaseModel):
    dataset_id: str
    descriptor: str
    arity: int
    mode: str
    columns: List[ColumnRef]
    matrix: List[List[Optional[float]]]
    raw: List[List[Optional[float]]]


class RowPageResponse(BaseModel):
    dataset_id: str
    columns: List[str]
    rows: List[List[Any]]
    total: int
    offset: int
    limit: int


class BookmarkModel(BaseModel):
    guidepost_id: str
    created_at: float


class SessionModel(BaseModel):
    model_config = ConfigDict(extra="forbid")

    version: int = 1
    dataset_id: str
    bookmarks: List[BookmarkModel] = Field(default_factory=list)
    focus: Optional[str] = None
    settings: Dict[str, Dict[str, Any]] = Field(default_factory=dict)


class SessionCreateRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")

    dataset_id: str


class SessionCreateResponse(BaseModel):
    session_id: str
    session: SessionModel


class ErrorBody(BaseModel):
    code: str
    message: str


class ErrorResponse(BaseModel):
    error: ErrorBody
