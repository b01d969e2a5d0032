from __future__ import annotations

import pytest

from normgame.events import (
    EVENT_KINDS,
    CorruptLogError,
    Event,
    check_sequence,
    event_to_line,
    parse_event_line,
    read_event_log,
    serialize_events,
    write_event_log,
)


def _event(seq, kind="round-started", payload=None):
    return Event(game_id="g1", round=1, seq=seq, kind=kind, payload=payload or {})


def test_event_round_trips_through_dict():
    event = _event(3, "attack", {"player_id": "p0", "attack_kind": "red"})
    assert Event.from_dict(event.to_dict()) == event


def test_line_format_is_compact_and_sorted():
    line = event_to_line(_event(1))
    assert "\n" not in line
    assert line.index('"game_id"') < line.index('"kind"') < line.index('"payload"')
    assert ": " not in line


def test_parse_round_trip():
    event = _event(9, "action-applied", {"player_id": "p2"})
    assert parse_event_line(event_to_line(event), 1) == event


def test_parse_rejects_bad_json():
    with pytest.raises(CorruptLogError):
        parse_event_line("{not json", 4)


def test_parse_rejects_missing_fields_and_unknown_kind():
    good = _event(1).to_dict()
    import json

    broken = dict(good)
    del broken["seq"]
    with pytest.raises(CorruptLogError):
        parse_event_line(json.dumps(broken), 1)
    weird = dict(good, kind="coffee-break")
    with pytest.raises(CorruptLogError):
        parse_event_line(json.dumps(weird), 1)


def test_check_sequence_accepts_contiguous_from_one():
    check_sequence([_event(1), _event(2), _event(3)])
    check_sequence([])


def test_check_sequence_rejects_gap_and_wrong_start():
    with pytest.raises(CorruptLogError):
        check_sequence([_event(1), _event(3)])
    with pytest.raises(CorruptLogError):
        check_sequence([_event(2), _event(3)])


def test_log_file_round_trip(tmp_path):
    events = [_event(i, "round-started", {"round": i}) for i in range(1, 6)]
    path = tmp_path / "game.jsonl"
    write_event_log(path, events)
    assert read_event_log(path) == events
    text = path.read_text(encoding="utf-8")
    assert text == serialize_events(events)
    assert text.endswith("\n")


def test_known_kinds_are_closed():
    assert "round-started" in EVENT_KINDS
    assert "game-over" in EVENT_KINDS
    assert "coffee-break" not in EVENT_KINDS
