from __future__ import annotations

import pytest

from guidepost.session import SESSION_VERSION, Bookmark, SessionError, SessionState


def make_session():
    s = SessionState(dataset_id="ds-1")
    s.bookmark("aaaa000011112222", created_at=100.0)
    s.bookmark("bbbb000011112222", created_at=200.0)
    s.set_focus("aaaa000011112222")
    s.update_settings("linear_relationship", metric="abs_pearson", min=0.2)
    s.update_settings("skew", order="descending")
    return s


def test_bookmark_twice_keeps_original():
    s = SessionState(dataset_id="d")
    s.bookmark("g1", created_at=10.0)
    s.bookmark("g1", created_at=99.0)
    assert s.bookmarks == [Bookmark("g1", 10.0)]


def test_bookmark_unbookmark_inverse():
    s = make_session()
    before = s.to_json()
    s.bookmark("cccc000011112222", created_at=300.0)
    s.unbookmark("cccc000011112222")
    assert s.to_json() == before


def test_unbookmark_missing_is_noop():
    s = make_session()
    before = s.to_json()
    s.unbookmark("not-there")
    assert s.to_json() == before


def test_bookmark_default_timestamp_is_now():
    s = SessionState(dataset_id="d")
    s.bookmark("g1")
    assert s.bookmarks[0].created_at == pytest.approx(__import__("time").time(), abs=5)


def test_save_load_save_identical_bytes():
    s = make_session()
    raw = s.to_json()
    again = SessionState.from_json(raw).to_json()
    assert again == raw
    assert raw.encode() == again.encode()


def test_round_trip_preserves_fields():
    s = make_session()
    loaded = SessionState.from_json(s.to_json())
    assert loaded.dataset_id == "ds-1"
    assert loaded.focus == "aaaa000011112222"
    assert [b.guidepost_id for b in loaded.bookmarks] == [
        "aaaa000011112222",
        "bbbb000011112222",
    ]
    assert loaded.settings["linear_relationship"] == {"metric": "abs_pearson", "min": 0.2}
    assert loaded.settings["skew"] == {"order": "descending"}


def test_settings_update_merges():
    s = SessionState(dataset_id="d")
    s.update_settings("skew", metric="skewness")
    s.update_settings("skew", order="ascending")
    assert s.settings["skew"] == {"metric": "skewness", "order": "ascending"}


def test_unknown_setting_key_rejected():
    s = SessionState(dataset_id="d")
    with pytest.raises(SessionError, match="unknown setting keys"):
        s.update_settings("skew", colour="red")


def test_focus_can_be_cleared():
    s = make_session()
    s.set_focus(None)
    assert SessionState.from_json(s.to_json()).focus is None


def test_version_field_present_and_checked():
    doc = make_session().to_dict()
    assert doc["version"] == SESSION_VERSION
    doc["version"] = 99
    with pytest.raises(SessionError, match="unsupported session version"):
        SessionState.from_dict(doc)


def test_corrupt_documents_raise():
    with pytest.raises(SessionError, match="corrupt"):
        SessionState.from_json("{not json")
    with pytest.raises(SessionError, match="corrupt"):
        SessionState.from_json("[1, 2]")
    with pytest.raises(SessionError, match="corrupt"):
        SessionState.from_dict({"version": SESSION_VERSION})


def test_serialized_form_is_canonical():
    raw = make_session().to_json()
    # Fixed field order and compact separators: stable across runs and platforms.
    order = ['"version"', '"dataset_id"', '"bookmarks"', '"focus"', '"settings"']
    assert [raw.index(key) for key in order] == sorted(raw.index(key) for key in order)
    assert ": " not in raw and ", " not in raw
    # Settings map itself is emitted in sorted descriptor order.
    assert raw.index('"linear_relationship"') < raw.index('"skew"')
