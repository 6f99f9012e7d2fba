"""Build response models from engine results.

Kept separate from the FastAPI app so the CLI can produce byte-identical
JSON without importing any HTTP machinery.
"""
from __future__ import annotations

from typing import List, Union

from ..dataset import Dataset
from ..engine import Guidepost, GuidepostQuery, NeighborhoodResult
from ..session import SessionState
from .schemas import (
    ColumnsResponse,
    ColumnMetaModel,
    GuidepostListResponse,
    GuidepostModel,
    MatrixOverviewResponse,
    NeighborhoodResponse,
    SessionModel,
    VectorOverviewResponse,
)


def column_meta_models(dataset: Dataset) -> List[ColumnMetaModel]:
    return [ColumnMetaModel(**meta.to_dict()) for meta in dataset.columns]


def columns_response(dataset: Dataset) -> ColumnsResponse:
    return ColumnsResponse(
        dataset_id=dataset.id, n_rows=dataset.n, columns=column_meta_models(dataset)
    )


def guidepost_model(g: Guidepost) -> GuidepostModel:
    return GuidepostModel(**g.to_dict())


def guidepost_list_response(
    dataset: Dataset, query: GuidepostQuery, guideposts: List[Guidepost]
) -> GuidepostListResponse:
    return GuidepostListResponse(
        dataset_id=dataset.id,
        descriptor=query.descriptor,
        metric=query.metric,
        order=query.order,
        mode=query.mode,
        k=query.k,
        guideposts=[guidepost_model(g) for g in guideposts],
    )


def neighborhood_response(dataset: Dataset, result: NeighborhoodResult) -> NeighborhoodResponse:
    doc = result.to_dict()
    return NeighborhoodResponse(
        dataset_id=dataset.id,
        focus_id=doc["focus_id"],
        descriptor=doc["descriptor"],
        focus_columns=doc["focus_columns"],
        n_x=[GuidepostModel(**g) for g in doc["n_x"]],
        n_y=[GuidepostModel(**g) for g in doc["n_y"]],
        n_xy=[GuidepostModel(**g) for g in doc["n_xy"]],
    )


def overview_response(
    dataset: Dataset, doc: dict
) -> Union[VectorOverviewResponse, MatrixOverviewResponse]:
    if doc["arity"] == 1:
        return VectorOverviewResponse(dataset_id=dataset.id, **doc)
    return MatrixOverviewResponse(dataset_id=dataset.id, **doc)


def session_model(state: SessionState) -> SessionModel:
    return SessionModel(**state.to_dict())


def session_state(model: SessionModel) -> SessionState:
    return SessionState.from_dict(model.model_dump(mode="json"))
