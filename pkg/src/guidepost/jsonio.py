"""Canonical JSON encoding shared by the CLI and the HTTP service.

Both front ends serialize responses through this module so that the same
logical query yields byte-identical JSON regardless of entry point.
"""
from __future__ import annotations

import json
from typing import Any


def canonical_dumps(obj: Any) -> str:
    """Compact, deterministic JSON; rejects NaN/Infinity outright."""
    return json.dumps(obj, separators=(",", ":"), ensure_ascii=False, allow_nan=False)


def canonical_bytes(obj: Any) -> bytes:
    return canonical_dumps(obj).encode("utf-8")
