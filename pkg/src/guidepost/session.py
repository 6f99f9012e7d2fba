"""Exploration sessions: bookmarks, focus, and per-descriptor view settings.

A session captures everything needed to restore an exploration exactly:
which guideposts were bookmarked (with timestamps), which one is focused,
and how each descriptor's carousel was configured. Serialization is a
versioned JSON document with a fixed field order, so save -> load -> save
reproduces identical bytes.
"""
from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Dict, List, Optional

from .jsonio import canonical_dumps

SESSION_VERSION = 1

# Per-descriptor settings a client may persist. Values are validated by the
# query layer when used, not here; a session is plain preference storage.
_SETTING_KEYS = ("metric", "order", "min", "max", "mode", "alpha")


class SessionError(Exception):
    pass


@dataclass
class Bookmark:
    guidepost_id: str
    created_at: float

    def to_dict(self) -> dict:
        return {"guidepost_id": self.guidepost_id, "created_at": self.created_at}


@dataclass
class SessionState:
    dataset_id: str
    bookmarks: List[Bookmark] = field(default_factory=list)
    focus: Optional[str] = None
    settings: Dict[str, dict] = field(default_factory=dict)

    def bookmark(self, guidepost_id: str, created_at: Optional[float] = None) -> None:
        """Add a bookmark; re-bookmarking an id keeps the original entry."""
        if any(b.guidepost_id == guidepost_id for b in self.bookmarks):
            return
        stamp = time.time() if created_at is None else float(created_at)
        self.bookmarks.append(Bookmark(guidepost_id, stamp))

    def unbookmark(self, guidepost_id: str) -> None:
        self.bookmarks = [b for b in self.bookmarks if b.guidepost_id != guidepost_id]

    def set_focus(self, guidepost_id: Optional[str]) -> None:
        self.focus = guidepost_id

    def update_settings(self, descriptor: str, **settings) -> None:
        unknown = set(settings) - set(_SETTING_KEYS)
        if unknown:
            raise SessionError(f"unknown setting keys: {sorted(unknown)}")
        slot = self.settings.setdefault(descriptor, {})
        slot.update(settings)

    def to_dict(self) -> dict:
        return {
            "version": SESSION_VERSION,
            "dataset_id": self.dataset_id,
            "bookmarks": [b.to_dict() for b in self.bookmarks],
            "focus": self.focus,
            "settings": {
                name: {k: v for k, v in sorted(self.settings[name].items())}
                for name in sorted(self.settings)
            },
        }

    def to_json(self) -> str:
        return canonical_dumps(self.to_dict())

    @classmethod
    def from_dict(cls, doc: dict) -> "SessionState":
        try:
            if doc["version"] != SESSION_VERSION:
                raise SessionError(f"unsupported session version {doc['version']}")
            state = cls(dataset_id=doc["dataset_id"], focus=doc.get("focus"))
            for entry in doc["bookmarks"]:
                state.bookmarks.append(
                    Bookmark(entry["guidepost_id"], float(entry["created_at"]))
                )
            for name, settings in doc.get("settings", {}).items():
                state.update_settings(name, **settings)
            return state
        except (KeyError, TypeError) as exc:
            raise SessionError(f"corrupt session document: {exc}") from exc

    @classmethod
    def from_json(cls, raw: str) -> "SessionState":
        import json

        try:
            doc = json.loads(raw)
        except ValueError as exc:
            raise SessionError(f"corrupt session document: {exc}") from exc
        if not isinstance(doc, dict):
            raise SessionError("corrupt session document: not an object")
        return cls.from_dict(doc)
