"""File-system registry shared by the CLI and the HTTP service.

Layout under a root directory:

    datasets/<dataset_id>/columns.npz   column arrays
    datasets/<dataset_id>/meta.json     fingerprint, column metadata
    datasets/<dataset_id>/bundle.bin    sketch bundle (absent until built)
    sessions/<session_id>.json          session documents

Dataset ids are fingerprint prefixes, so re-ingesting identical bytes is a
no-op. Writes go through a temp file + rename, keeping readers consistent
with concurrent writers.
"""
from __future__ import annotations

import os
import tempfile
import uuid
from collections import OrderedDict
from pathlib import Path
from typing import List, Optional

from .dataset import Dataset
from .session import SessionState
from .sketch import SketchBundle

_CACHE_SIZE = 8


class RegistryError(Exception):
    pass


class Registry:
    def __init__(self, root) -> None:
        self.root = Path(root)
        (self.root / "datasets").mkdir(parents=True, exist_ok=True)
        (self.root / "sessions").mkdir(parents=True, exist_ok=True)
        self._datasets: "OrderedDict[str, Dataset]" = OrderedDict()
        self._bundles: "OrderedDict[str, SketchBundle]" = OrderedDict()

    # -- datasets ----------------------------------------------------------

    def dataset_dir(self, dataset_id: str) -> Path:
        return self.root / "datasets" / dataset_id

    def has_dataset(self, dataset_id: str) -> bool:
        return (self.dataset_dir(dataset_id) / "meta.json").exists()

    def list_datasets(self) -> List[str]:
        return sorted(
            p.name for p in (self.root / "datasets").iterdir() if (p / "meta.json").exists()
        )

    def add_dataset(self, dataset: Dataset) -> str:
        target = self.dataset_dir(dataset.id)
        if self.has_dataset(dataset.id):
            return dataset.id
        tmp = Path(tempfile.mkdtemp(dir=self.root / "datasets", prefix=".ingest-"))
        try:
            dataset.save(tmp)
            os.replace(tmp, target)
        except OSError:
            # Lost a race with a concurrent ingest of the same bytes.
            if not self.has_dataset(dataset.id):
                raise
        finally:
            if tmp.exists() and tmp != target:
                for child in tmp.iterdir():
                    child.unlink()
                tmp.rmdir()
        self._cache_put(self._datasets, dataset.id, dataset)
        return dataset.id

    def load_dataset(self, dataset_id: str) -> Dataset:
        cached = self._datasets.get(dataset_id)
        if cached is not None:
            self._datasets.move_to_end(dataset_id)
            return cached
        if not self.has_dataset(dataset_id):
            raise KeyError(dataset_id)
        dataset = Dataset.load(self.dataset_dir(dataset_id))
        self._cache_put(self._datasets, dataset_id, dataset)
        return dataset

    # -- bundles -----------------------------------------------------------

    def bundle_path(self, dataset_id: str) -> Path:
        return self.dataset_dir(dataset_id) / "bundle.bin"

    def bundle_ready(self, dataset_id: str) -> bool:
        return self.bundle_path(dataset_id).exists()

    def save_bundle(self, dataset_id: str, bundle: SketchBundle) -> Path:
        if not self.has_dataset(dataset_id):
            raise KeyError(dataset_id)
        path = self.bundle_path(dataset_id)
        blob = bundle.to_bytes()
        fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=".bundle-")
        try:
            with os.fdopen(fd, "wb") as fh:
                fh.write(blob)
            os.replace(tmp, path)
        finally:
            if os.path.exists(tmp):
                os.unlink(tmp)
        self._cache_put(self._bundles, dataset_id, bundle)
        return path

    def load_bundle(self, dataset_id: str) -> Optional[SketchBundle]:
        cached = self._bundles.get(dataset_id)
        if cached is not None:
            self._bundles.move_to_end(dataset_id)
            return cached
        path = self.bundle_path(dataset_id)
        if not path.exists():
            return None
        bundle = SketchBundle.from_bytes(path.read_bytes())
        self._cache_put(self._bundles, dataset_id, bundle)
        return bundle

    # -- sessions ----------------------------------------------------------

    def session_path(self, session_id: str) -> Path:
        return self.root / "sessions" / f"{session_id}.json"

    def create_session(self, state: SessionState) -> str:
        session_id = uuid.uuid4().hex[:16]
        self.save_session(session_id, state)
        return session_id

    def save_session(self, session_id: str, state: SessionState) -> None:
        path = self.session_path(session_id)
        fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=".session-")
        try:
            with os.fdopen(fd, "w", encoding="utf-8") as fh:
                fh.write(state.to_json())
            os.replace(tmp, path)
        finally:
            if os.path.exists(tmp):
                os.unlink(tmp)

    def load_session(self, session_id: str) -> SessionState:
        path = self.session_path(session_id)
        if not path.exists():
            raise KeyError(session_id)
        return SessionState.from_json(path.read_text(encoding="utf-8"))

    def has_session(self, session_id: str) -> bool:
        return self.session_path(session_id).exists()

    # -- cache -------------------------------------------------------------

    @staticmethod
    def _cache_put(cache: OrderedDict, key: str, value) -> None:
        cache[key] = value
        cache.move_to_end(key)
        while len(cache) > _CACHE_SIZE:
            cache.popitem(last=False)
