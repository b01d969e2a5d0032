"""Append-only event records and their JSON Lines form.

One line per event, canonical key order, so identical games serialize to
byte-identical files.  The log is the unit of replay: everything needed to
rebuild a final game state is in here.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable


class CorruptLogError(ValueError):
    def __init__(self, message: str, seq: int | None = None) -> None:
        super().__init__(message)
        self.seq = seq


GAME_CREATED = "game-created"
ROUND_STARTED = "round-started"
MANAGER_OBSERVED = "manager-observed"
MANAGER_SANCTIONED = "manager-sanctioned"
ACTION_SUBMITTED = "action-submitted"
ACTION_APPLIED = "action-applied"
ACTION_REJECTED = "action-rejected"
ATTACK = "attack"
PROJECT_BANKED = "project-banked"
SANCTION_LIFTED = "sanction-lifted"
GAME_OVER = "game-over"

EVENT_KINDS = frozenset(
    {
        GAME_CREATED,
        ROUND_STARTED,
        MANAGER_OBSERVED,
        MANAGER_SANCTIONED,
        ACTION_SUBMITTED,
        ACTION_APPLIED,
        ACTION_REJECTED,
        ATTACK,
        PROJECT_BANKED,
        SANCTION_LIFTED,
        GAME_OVER,
    }
)


@dataclass(frozen=True)
class Event:
    game_id: str
    round: int
    seq: int
    kind: str
    payload: dict

    def to_dict(self) -> dict:
        return {
            "game_id": self.game_id,
            "round": self.round,
            "seq": self.seq,
            "kind": self.kind,
            "payload": self.payload,
        }

    @classmethod
    def from_dict(cls, data: dict) -> Event:
        return cls(
            game_id=data["game_id"],
            round=data["round"],
            seq=data["seq"],
            kind=data["kind"],
            payload=data["payload"],
        )


def event_to_line(event: Event) -> str:
    return json.dumps(event.to_dict(), sort_keys=True, separators=(",", ":"))


def serialize_events(events: Iterable[Event]) -> str:
    return "".join(event_to_line(e) + "\n" for e in events)


def write_event_log(path: str | Path, events: Iterable[Event]) -> None:
    Path(path).write_text(serialize_events(events), encoding="utf-8")


def parse_event_line(line: str, line_number: int) -> Event:
    try:
        data = json.loads(line)
    except json.JSONDecodeError as exc:
        raise CorruptLogError(f"line {line_number} is not valid JSON: {exc}") from exc
    for key in ("game_id", "round", "seq", "kind", "payload"):
        if key not in data:
            raise CorruptLogError(f"line {line_number} is missing field {key!r}")
    if data["kind"] not in EVENT_KINDS:
        raise CorruptLogError(
            f"line {line_number} has unknown event kind {data['kind']!r}",
            seq=data["seq"],
        )
    return Event.from_dict(data)


def read_event_log(path: str | Path) -> list[Event]:
    """Parse a JSONL event file; a trailing half-written line is an error."""
    events = []
    with open(path, "r", encoding="utf-8") as fh:
        for number, line in enumerate(fh, start=1):
            stripped = line.strip()
            if not stripped:
                continue
            events.append(parse_event_line(stripped, number))
    return events


def check_sequence(events: list[Event]) -> None:
    """Seq numbers must run 1, 2, 3, ... with no gaps or repeats."""
    for index, event in enumerate(events):
        expected = index + 1
        if event.seq != expected:
            raise CorruptLogError(
                f"event sequence broken: expected seq {expected}, found {event.seq}",
                seq=event.seq,
            )
