"""WebSocket room server for live multiplayer games.

Rooms are provisioned up front (``--room`` config files), joined by a
six-character code, and host exactly one game each.  Seats not reserved
for bots are claimed by humans in join order; when the last open seat is
claimed the game starts.  The server is authoritative: clients only ever
submit an action for the current round, and every state change goes
through the engine.

Persistence is write-ahead: each round's engine events are appended to
the room's JSON Lines log in a single flushed-and-fsynced write before
any message about them is broadcast.  On restart, rooms are rebuilt by
replaying their logs, so a crash between rounds loses nothing and a
crash mid-round loses only uncommitted submissions, which clients and
bots simply send again.  Survey answers go to a separate append-only
JSON Lines file; when an item is answered twice, the last line wins.

Wire format: one JSON text message per frame.  The envelope carries
``type``, ``roomCode``, ``protocolVersion``, a client-chosen
``requestId`` echoed on direct replies, and a type-specific ``body``
whose field names match the engine's serialization.  ``action_ack``
doubles as the acknowledgement for survey answers (body carries
``kind: "survey"``); the message type set is closed and gains no
separate survey ack.
"""

from __future__ import annotations

import asyncio
import hashlib
import json
import os
import secrets
import time
from contextlib import asynccontextmanager
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Optional

from fastapi import FastAPI, WebSocket, WebSocketDisconnect

from . import events as ev
from .engine import (
    ActionSource,
    GameState,
    Phase,
    begin_round,
    enabled_actions_from_view,
    new_game,
    player_view,
    replay,
    state_digest,
    submit_round,
)
from .events import Event, event_to_line, parse_event_line
from .model import Action, ConfigError, GameConfig
from .policies import PolicySpec, make_action_source

PROTOCOL_VERSION = 1

# No 0/O/1/I/L: codes get read aloud and typed on phones.
ROOM_CODE_ALPHABET = "ABCDEFGHJKMNPQRSTUVWXYZ23456789"
ROOM_CODE_LENGTH = 6

SURVEY_SCALE_MIN = 1
SURVEY_SCALE_MAX = 5
SURVEY_ITEMS = (
    {
        "id": "sanction_influence",
        "text": "How influential were sanctions on your decisions during the game?",
        "min": SURVEY_SCALE_MIN,
        "max": SURVEY_SCALE_MAX,
        "min_label": "not at all influential",
        "max_label": "very influential",
    },
    {
        "id": "sanction_detriment",
        "text": "How detrimental were sanctions to your overall productivity?",
        "min": SURVEY_SCALE_MIN,
        "max": SURVEY_SCALE_MAX,
        "min_label": "not at all detrimental",
        "max_label": "very detrimental",
    },
)
_SURVEY_ITEM_IDS = frozenset(item["id"] for item in SURVEY_ITEMS)

# A committed log always follows these kinds with a round-started or
# game-over line (submit and begin batches land in one write).  Any such
# events dangling at the end of a log are an interrupted batch: dropped
# from the restored state, preserved on disk in a .recovered-tail file.
_SUBMIT_BATCH_KINDS = frozenset(
    {ev.ACTION_SUBMITTED, ev.ACTION_APPLIED, ev.ACTION_REJECTED, ev.ATTACK, ev.PROJECT_BANKED}
)


@dataclass(frozen=True)
class ServerSettings:
    storage_dir: Path
    round_timeout: float = 30.0
    room_files: tuple[str, ...] = ()


@dataclass
class Seat:
    """One claimable position in a room; bots never appear here."""

    index: int
    name: Optional[str] = None
    token: Optional[str] = None
    socket: Optional[WebSocket] = None

    @property
    def claimed(self) -> bool:
        return self.token is not None


@dataclass
class Room:
    code: str
    config: GameConfig
    bots: dict[int, PolicySpec]
    log_path: Path
    meta_path: Path
    survey_path: Path
    seats: dict[int, Seat] = field(default_factory=dict)
    state: Optional[GameState] = None
    pending: dict[str, Action] = field(default_factory=dict)
    timed_out: set[str] = field(default_factory=set)
    deadline: Optional[float] = None
    timer: Optional[asyncio.Task] = None
    bot_sources: dict[str, ActionSource] = field(default_factory=dict)
    frozen: bool = False
    survey_seq: int = 0
    lock: asyncio.Lock = field(default_factory=asyncio.Lock)

    @property
    def human_seats(self) -> list[int]:
        return sorted(self.seats)

    @property
    def started(self) -> bool:
        return self.state is not None

    @property
    def finished(self) -> bool:
        return self.state is not None and self.state.phase is Phase.FINISHED

    def lifecycle(self) -> str:
        if self.state is None:
            return "lobby"
        if self.state.phase is Phase.FINISHED:
            return "finished"
        if self.state.phase is Phase.AWAITING_ACTIONS:
            return "in-round"
        return "between-rounds"

    def player_id_for_seat(self, index: int) -> str:
        return f"p{index}"

    def seat_for_player(self, player_id: str) -> Optional[Seat]:
        for seat in self.seats.values():
            if self.player_id_for_seat(seat.index) == player_id:
                return seat
        return None


def generate_room_code(taken: set[str]) -> str:
    while True:
        code = "".join(secrets.choice(ROOM_CODE_ALPHABET) for _ in range(ROOM_CODE_LENGTH))
        if code not in taken:
            return code


def derive_room_code(name: str, raw: dict) -> str:
    """Stable code for a bootstrap file, so restarts reuse the room."""
    blob = name + "\n" + json.dumps(raw, sort_keys=True, separators=(",", ":"))
    digest = hashlib.sha256(blob.encode("utf-8")).digest()
    return "".join(ROOM_CODE_ALPHABET[b % len(ROOM_CODE_ALPHABET)] for b in digest[:ROOM_CODE_LENGTH])


def _fsync_write(path: Path, text: str, append: bool) -> None:
    mode = "a" if append else "w"
    with open(path, mode, encoding="utf-8") as handle:
        handle.write(text)
        handle.flush()
        os.fsync(handle.fileno())


def _atomic_write(path: Path, text: str) -> None:
    tmp = path.with_suffix(path.suffix + ".tmp")
    _fsync_write(tmp, text, append=False)
    os.replace(tmp, path)


class RoomManager:
    """All rooms of one server process; storage layout lives here.

    Per room on disk: ``<code>.room.json`` (config, bots, claimed
    seats), ``<code>.jsonl`` (the engine event log, append-only),
    ``<code>.survey.jsonl`` (post-game answers, append-only).
    """

    def __init__(self, settings: ServerSettings):
        self.settings = settings
        self.storage = Path(settings.storage_dir)
        self.rooms: dict[str, Room] = {}

    # -- provisioning and restore -------------------------------------

    def load(self) -> None:
        self.storage.mkdir(parents=True, exist_ok=True)
        for meta_path in sorted(self.storage.glob("*.room.json")):
            room = self._restore_room(meta_path)
            self.rooms[room.code] = room
        for room_file in self.settings.room_files:
            self.bootstrap_room(Path(room_file))

    def bootstrap_room(self, room_file: Path) -> Room:
        """Create a room from a game-config JSON file.

        The file is either a bare config object or ``{"config": {...}}``
        with optional ``"bots"`` (seat index -> policy) and
        ``"room_code"`` keys.  Without a pinned code the code is derived
        from the file content, so restarting with the same flags reuses
        the already-provisioned room instead of minting a twin.
        """
        raw = json.loads(Path(room_file).read_text(encoding="utf-8"))
        if not isinstance(raw, dict):
            raise ConfigError(f"{room_file}: room file must hold a JSON object")
        if "config" in raw:
            config_raw = raw["config"]
            bots_raw = raw.get("bots", {})
            code = raw.get("room_code")
            extras = set(raw) - {"config", "bots", "room_code"}
            if extras:
                raise ConfigError(f"{room_file}: unknown keys {sorted(extras)}")
        else:
            config_raw, bots_raw, code = raw, {}, None
        config = GameConfig.from_dict(config_raw)
        config.validate()
        if code is not None:
            code = str(code).upper()
        else:
            code = derive_room_code(Path(room_file).name, raw)
        if code in self.rooms:
            return self.rooms[code]
        bots: dict[int, PolicySpec] = {}
        for key, spec_raw in dict(bots_raw).items():
            index = int(key)
            if not 0 <= index < config.player_count:
                raise ConfigError(f"{room_file}: bot seat {index} out of range")
            bots[index] = PolicySpec.from_dict(spec_raw)
        if len(bots) >= config.player_count:
            raise ConfigError(f"{room_file}: at least one seat must be human")
        room = Room(
            code=code,
            config=config,
            bots=bots,
            log_path=self.storage / f"{code}.jsonl",
            meta_path=self.storage / f"{code}.room.json",
            survey_path=self.storage / f"{code}.survey.jsonl",
        )
        for index in range(config.player_count):
            if index not in bots:
                room.seats[index] = Seat(index=index)
        self._write_meta(room)
        self.rooms[code] = room
        return room

    def _write_meta(self, room: Room) -> None:
        meta = {
            "room_code": room.code,
            "protocol_version": PROTOCOL_VERSION,
            "config": room.config.to_dict(),
            "bots": {str(i): spec.to_dict() for i, spec in sorted(room.bots.items())},
            "seats": {
                str(seat.index): {"name": seat.name, "token": seat.token}
                for seat in room.seats.values()
                if seat.claimed
            },
        }
        _atomic_write(room.meta_path, json.dumps(meta, indent=2, sort_keys=True) + "\n")

    def _restore_room(self, meta_path: Path) -> Room:
        meta = json.loads(meta_path.read_text(encoding="utf-8"))
        code = meta["room_code"]
        config = GameConfig.from_dict(meta["config"])
        bots = {int(i): PolicySpec.from_dict(raw) for i, raw in meta.get("bots", {}).items()}
        room = Room(
            code=code,
            config=config,
            bots=bots,
            log_path=self.storage / f"{code}.jsonl",
            meta_path=meta_path,
            survey_path=self.storage / f"{code}.survey.jsonl",
        )
        for index in range(config.player_count):
            if index not in bots:
                room.seats[index] = Seat(index=index)
        for key, raw in meta.get("seats", {}).items():
            seat = room.seats[int(key)]
            seat.name = raw.get("name")
            seat.token = raw.get("token")
        events = self._read_log_tolerant(room)
        if events:
            room.state = replay(events)
            self._rebuild_bot_sources(room)
        if room.survey_path.exists():
            with open(room.survey_path, encoding="utf-8") as handle:
                room.survey_seq = sum(1 for line in handle if line.strip())
        return room

    def _read_log_tolerant(self, room: Room) -> list[Event]:
        """Read a room log, shedding any interrupted final batch.

        A torn tail (half-written line, or submit-phase events never
        sealed by the next round-started or game-over) is split off to
        ``<code>.jsonl.recovered-tail`` so nothing is destroyed, and the
        log itself is rewritten to the last committed batch.
        """
        if not room.log_path.exists():
            return []
        lines = room.log_path.read_text(encoding="utf-8").splitlines()
        lines = [line for line in lines if line.strip()]
        events: list[Event] = []
        torn: list[str] = []
        for pos, line in enumerate(lines):
            try:
                events.append(parse_event_line(line, pos + 1))
            except ev.CorruptLogError:
                if pos == len(lines) - 1:
                    torn = [line]
                    break
                raise
        keep = len(events)
        while keep > 0 and events[keep - 1].kind in _SUBMIT_BATCH_KINDS:
            keep -= 1
        torn = [event_to_line(e) for e in events[keep:]] + torn
        if torn:
            with open(room.log_path.parent / f"{room.log_path.name}.recovered-tail", "a", encoding="utf-8") as handle:
                handle.write("\n".join(torn) + "\n")
            _atomic_write(
                room.log_path,
                "".join(event_to_line(e) + "\n" for e in events[:keep]),
            )
        return events[:keep]

    def _rebuild_bot_sources(self, room: Room) -> None:
        room.bot_sources = {
            room.player_id_for_seat(i): make_action_source(spec, room.config.seed, room.player_id_for_seat(i))
            for i, spec in room.bots.items()
        }

    async def activate_restored(self) -> None:
        """Re-arm the round clock of rooms restored mid-game."""
        for room in self.rooms.values():
            async with room.lock:
                if room.started and not room.finished:
                    self._fill_bot_actions(room)
                    await self._resolve_if_ready(room)
                    if room.started and not room.finished:
                        self._arm_timer(room)

    # -- persistence ---------------------------------------------------

    def _append_events(self, room: Room, batch: list[Event]) -> None:
        text = "".join(event_to_line(e) + "\n" for e in batch)
        _fsync_write(room.log_path, text, append=True)

    def _append_survey(self, room: Room, record: dict) -> None:
        room.survey_seq += 1
        record = {"seq": room.survey_seq, **record}
        _fsync_write(
            room.survey_path, json.dumps(record, sort_keys=True, separators=(",", ":")) + "\n", append=True
        )

    # -- messaging -----------------------------------------------------

    async def _send(self, socket: Optional[WebSocket], message: dict) -> bool:
        if socket is None:
            return False
        try:
            await socket.send_text(json.dumps(message, sort_keys=True))
            return True
        except Exception:
            return False

    def _envelope(self, room: Room, type_: str, body: dict, request_id: Any = None) -> dict:
        return {
            "type": type_,
            "roomCode": room.code,
            "protocolVersion": PROTOCOL_VERSION,
            "requestId": request_id,
            "body": body,
        }

    async def _send_error(
        self, socket: WebSocket, reason: str, detail: str, room: Optional[Room] = None, request_id: Any = None
    ) -> None:
        message = {
            "type": "error",
            "roomCode": room.code if room else None,
            "protocolVersion": PROTOCOL_VERSION,
            "requestId": request_id,
            "body": {"reason": reason, "detail": detail},
        }
        await self._send(socket, message)

    def _room_state_body(self, room: Room, you: Optional[int]) -> dict:
        seats = []
        for index in range(room.config.player_count):
            if index in room.bots:
                seats.append(
                    {
                        "seat": index,
                        "player_id": room.player_id_for_seat(index),
                        "kind": "bot",
                        "name": f"bot-{room.bots[index].kind}",
                        "connected": True,
                    }
                )
            else:
                seat = room.seats[index]
                seats.append(
                    {
                        "seat": index,
                        "player_id": room.player_id_for_seat(index),
                        "kind": "human" if seat.claimed else "open",
                        "name": seat.name,
                        "connected": seat.socket is not None,
                    }
                )
        body = {
            "lifecycle": room.lifecycle(),
            "round": room.state.round if room.started else None,
            "deadline_ms": int(room.deadline * 1000) if room.deadline else None,
            "seats": seats,
            "you": you,
            "frozen": room.frozen,
            "config": room.config.to_dict(),
            "state_digest": state_digest(room.state) if room.started else None,
        }
        return body

    async def _broadcast_room_state(self, room: Room) -> None:
        for seat in room.seats.values():
            await self._send(
                seat.socket,
                self._envelope(room, "room_state", self._room_state_body(room, seat.index)),
            )

    def _round_begin_body(self, room: Room, player_id: str) -> dict:
        assert room.state is not None
        view = player_view(room.state, player_id)
        enabled = enabled_actions_from_view(view)
        return {
            "round": room.state.round,
            "deadline_ms": int(room.deadline * 1000) if room.deadline else None,
            "timeout_seconds": self.settings.round_timeout,
            "view": view.to_dict(),
            "enabled_actions": [a.to_dict() for a in enabled],
            "forced_skip": view.player.sanction.active,
        }

    async def _broadcast_round_begin(self, room: Room) -> None:
        for seat in room.seats.values():
            await self._send(
                seat.socket,
                self._envelope(room, "round_begin", self._round_begin_body(room, room.player_id_for_seat(seat.index))),
            )

    def _round_result_body(self, room: Room, batch: list[Event], resolved_round: int, player_id: str) -> dict:
        """Public narrative of one resolved round plus a fresh view."""
        assert room.state is not None
        actions = []
        attacks = []
        sanctions = []
        lifted = []
        for event in batch:
            if event.kind == ev.ACTION_APPLIED:
                entry = {"player_id": event.payload["player_id"], "applied": True}
                entry["action"] = event.payload["action"]
                if "banked" in event.payload:
                    entry["banked"] = event.payload["banked"]
                if "timed_out" in event.payload:
                    entry["timed_out"] = event.payload["timed_out"]
                actions.append(entry)
            elif event.kind == ev.ACTION_REJECTED:
                actions.append(
                    {
                        "player_id": event.payload["player_id"],
                        "applied": False,
                        "action": event.payload["action"],
                        "reason": event.payload["reason"],
                    }
                )
            elif event.kind == ev.ATTACK:
                attacks.append(dict(event.payload))
            elif event.kind == ev.MANAGER_SANCTIONED:
                sanctions.append(dict(event.payload))
            elif event.kind == ev.SANCTION_LIFTED:
                lifted.append(dict(event.payload))
        view = player_view(room.state, player_id)
        return {
            "round": resolved_round,
            "actions": actions,
            "attacks": attacks,
            "sanctions": sanctions,
            "sanctions_lifted": lifted,
            "scores": {p.player_id: p.score for p in room.state.players},
            "game_over": room.finished,
            "view": view.to_dict(),
        }

    async def _broadcast_round_result(self, room: Room, batch: list[Event], resolved_round: int) -> None:
        for seat in room.seats.values():
            await self._send(
                seat.socket,
                self._envelope(
                    room,
                    "round_result",
                    self._round_result_body(room, batch, resolved_round, room.player_id_for_seat(seat.index)),
                ),
            )

    async def _broadcast_game_over(self, room: Room) -> None:
        assert room.state is not None
        final_scores = {p.player_id: p.score for p in room.state.players}
        for seat in room.seats.values():
            await self._send(
                seat.socket,
                self._envelope(
                    room,
                    "game_over",
                    {
                        "game_id": room.state.game_id,
                        "final_scores": final_scores,
                        "rounds": room.state.round,
                        "attack_count": room.state.attack_count,
                        "state_digest": state_digest(room.state),
                    },
                ),
            )
            await self._send(
                seat.socket,
                self._envelope(
                    room,
                    "survey_prompt",
                    {"game_id": room.state.game_id, "items": [dict(item) for item in SURVEY_ITEMS]},
                ),
            )

    # -- game flow (all called with room.lock held) --------------------

    def _cancel_timer(self, room: Room) -> None:
        # A round resolved by the timer reaches here from the timer task
        # itself; cancelling that would abort its pending broadcasts.
        if room.timer is not None and room.timer is not asyncio.current_task():
            room.timer.cancel()

    def _arm_timer(self, room: Room) -> None:
        self._cancel_timer(room)
        room.deadline = time.time() + self.settings.round_timeout
        assert room.state is not None
        room.timer = asyncio.get_running_loop().create_task(
            self._round_timer(room, room.state.round)
        )

    async def _round_timer(self, room: Room, round_number: int) -> None:
        try:
            await asyncio.sleep(self.settings.round_timeout)
        except asyncio.CancelledError:
            return
        async with room.lock:
            state = room.state
            if (
                state is None
                or state.phase is not Phase.AWAITING_ACTIONS
                or state.round != round_number
                or room.frozen
            ):
                return
            for player in state.players:
                if player.player_id not in room.pending:
                    room.timed_out.add(player.player_id)
            await self._resolve_if_ready(room)

    def _fill_bot_actions(self, room: Room) -> None:
        state = room.state
        if state is None or state.phase is not Phase.AWAITING_ACTIONS:
            return
        for player_id, source in room.bot_sources.items():
            if player_id not in room.pending:
                room.pending[player_id] = source(player_view(state, player_id))

    async def _start_game(self, room: Room) -> None:
        state, created = new_game(room.config, game_id=f"room-{room.code.lower()}")
        state, began = begin_round(state)
        batch = created + began
        if not self._persist(room, batch):
            return
        room.state = state
        self._rebuild_bot_sources(room)
        room.pending = {}
        room.timed_out = set()
        self._arm_timer(room)
        await self._broadcast_room_state(room)
        await self._broadcast_round_begin(room)
        self._fill_bot_actions(room)
        await self._resolve_if_ready(room)

    def _persist(self, room: Room, batch: list[Event]) -> bool:
        """Write-ahead append; a storage failure freezes the room."""
        try:
            self._append_events(room, batch)
            return True
        except OSError as exc:
            room.frozen = True
            self._cancel_timer(room)
            asyncio.get_running_loop().create_task(self._broadcast_frozen(room, str(exc)))
            return False

    async def _broadcast_frozen(self, room: Room, detail: str) -> None:
        for seat in room.seats.values():
            await self._send_error(seat.socket, "storage_failure", detail, room=room)

    async def _resolve_if_ready(self, room: Room) -> None:
        """Advance rounds while every player is accounted for."""
        while True:
            state = room.state
            if state is None or state.phase is not Phase.AWAITING_ACTIONS or room.frozen:
                return
            accounted = set(room.pending) | room.timed_out
            if any(p.player_id not in accounted for p in state.players):
                return
            actions = dict(room.pending)
            for player_id in room.timed_out:
                actions.setdefault(player_id, Action.skip())
            resolved_round = state.round
            next_state, submitted = submit_round(state, actions, timed_out=frozenset(room.timed_out))
            batch = list(submitted)
            if next_state.phase is Phase.FINISHED:
                if not self._persist(room, batch):
                    return
                room.state = next_state
                room.pending = {}
                room.timed_out = set()
                room.deadline = None
                self._cancel_timer(room)
                room.timer = None
                await self._broadcast_round_result(room, batch, resolved_round)
                await self._broadcast_room_state(room)
                await self._broadcast_game_over(room)
                return
            next_state, began = begin_round(next_state)
            batch.extend(began)
            if not self._persist(room, batch):
                return
            room.state = next_state
            room.pending = {}
            room.timed_out = set()
            self._arm_timer(room)
            await self._broadcast_round_result(room, batch, resolved_round)
            await self._broadcast_round_begin(room)
            self._fill_bot_actions(room)

    # -- client message handling --------------------------------------

    async def handle_socket(self, socket: WebSocket) -> None:
        await socket.accept()
        room: Optional[Room] = None
        seat: Optional[Seat] = None
        try:
            while True:
                raw = await socket.receive_text()
                try:
                    message = json.loads(raw)
                    if not isinstance(message, dict):
                        raise ValueError("not an object")
                except ValueError:
                    await self._send_error(socket, "malformed_message", "message is not a JSON object")
                    continue
                request_id = message.get("requestId")
                if message.get("protocolVersion") != PROTOCOL_VERSION:
                    await self._send_error(
                        socket,
                        "version_mismatch",
                        f"server speaks protocol {PROTOCOL_VERSION}",
                        room=room,
                        request_id=request_id,
                    )
                    continue
                type_ = message.get("type")
                body = message.get("body")
                if not isinstance(body, dict):
                    body = {}
                if type_ == "join":
                    room, seat = await self._handle_join(socket, message, body, request_id)
                elif room is None or seat is None:
                    await self._send_error(socket, "not_joined", "join a room first", request_id=request_id)
                elif type_ == "submit_action":
                    await self._handle_submit(socket, room, seat, body, request_id)
                elif type_ == "survey_answer":
                    await self._handle_survey(socket, room, seat, body, request_id)
                else:
                    await self._send_error(
                        socket, "unknown_type", f"unsupported message type {type_!r}", room=room, request_id=request_id
                    )
        except WebSocketDisconnect:
            pass
        finally:
            if room is not None and seat is not None and seat.socket is socket:
                async with room.lock:
                    seat.socket = None
                    await self._broadcast_room_state(room)

    async def _handle_join(
        self, socket: WebSocket, message: dict, body: dict, request_id: Any
    ) -> tuple[Optional[Room], Optional[Seat]]:
        code = str(message.get("roomCode") or body.get("room_code") or "").upper()
        room = self.rooms.get(code)
        if room is None:
            await self._send_error(socket, "unknown_room", f"no room {code!r}", request_id=request_id)
            return None, None
        name = str(body.get("name") or "").strip() or None
        token = body.get("seat_token")
        async with room.lock:
            seat: Optional[Seat] = None
            reconnected = False
            if token is not None:
                for candidate in room.seats.values():
                    if candidate.token == token:
                        seat = candidate
                        reconnected = True
                        break
                if seat is None:
                    await self._send_error(socket, "bad_token", "seat token not recognized", room=room, request_id=request_id)
                    return None, None
            else:
                taken_names = {s.name for s in room.seats.values() if s.claimed and s.name}
                if name is not None and name in taken_names:
                    await self._send_error(socket, "duplicate_name", f"name {name!r} already seated", room=room, request_id=request_id)
                    return None, None
                for index in room.human_seats:
                    if not room.seats[index].claimed:
                        seat = room.seats[index]
                        break
                if seat is None:
                    await self._send_error(socket, "room_full", "every seat is claimed", room=room, request_id=request_id)
                    return None, None
                seat.token = secrets.token_hex(16)
                seat.name = name or f"player-{seat.index}"
                try:
                    self._write_meta(room)
                except OSError as exc:
                    seat.token = None
                    seat.name = None
                    await self._send_error(socket, "storage_failure", str(exc), room=room, request_id=request_id)
                    return None, None
            old_socket = seat.socket
            seat.socket = socket
            if old_socket is not None and old_socket is not socket:
                try:
                    await old_socket.close(code=4000)
                except Exception:
                    pass
            await self._send(
                socket,
                self._envelope(
                    room,
                    "joined",
                    {
                        "seat": seat.index,
                        "player_id": room.player_id_for_seat(seat.index),
                        "seat_token": seat.token,
                        "name": seat.name,
                        "reconnected": reconnected,
                    },
                    request_id,
                ),
            )
            await self._broadcast_room_state(room)
            if not room.started:
                if all(s.claimed for s in room.seats.values()):
                    await self._start_game(room)
            elif room.state is not None and room.state.phase is Phase.AWAITING_ACTIONS:
                await self._send(
                    socket,
                    self._envelope(room, "round_begin", self._round_begin_body(room, room.player_id_for_seat(seat.index))),
                )
            elif room.finished:
                await self._send(
                    socket,
                    self._envelope(
                        room,
                        "survey_prompt",
                        {"game_id": room.state.game_id, "items": [dict(item) for item in SURVEY_ITEMS]},
                    ),
                )
        return room, seat

    async def _handle_submit(
        self, socket: WebSocket, room: Room, seat: Seat, body: dict, request_id: Any
    ) -> None:
        async with room.lock:
            state = room.state
            if room.frozen:
                await self._send_error(socket, "room_frozen", "storage failed; room is read-only", room=room, request_id=request_id)
                return
            if state is None or state.phase is not Phase.AWAITING_ACTIONS:
                await self._send(
                    socket,
                    self._envelope(room, "action_rejected", {"reason": "not_in_round"}, request_id),
                )
                return
            if body.get("round") != state.round:
                await self._send(
                    socket,
                    self._envelope(
                        room,
                        "action_rejected",
                        {"reason": "wrong_round", "round": state.round},
                        request_id,
                    ),
                )
                return
            player_id = room.player_id_for_seat(seat.index)
            if player_id in room.pending:
                await self._send(
                    socket,
                    self._envelope(room, "action_rejected", {"reason": "already_acted"}, request_id),
                )
                return
            try:
                action = Action.from_dict(body.get("action") or {})
            except (KeyError, ValueError, TypeError):
                await self._send(
                    socket,
                    self._envelope(room, "action_rejected", {"reason": "malformed_action"}, request_id),
                )
                return
            room.pending[player_id] = action
            room.timed_out.discard(player_id)
            await self._send(
                socket,
                self._envelope(room, "action_ack", {"round": state.round, "action": action.to_dict()}, request_id),
            )
            await self._resolve_if_ready(room)

    async def _handle_survey(
        self, socket: WebSocket, room: Room, seat: Seat, body: dict, request_id: Any
    ) -> None:
        async with room.lock:
            if not room.finished:
                await self._send_error(socket, "not_finished", "survey opens after game over", room=room, request_id=request_id)
                return
            assert room.state is not None
            item = body.get("item")
            if item not in _SURVEY_ITEM_IDS:
                await self._send_error(socket, "bad_survey_item", f"unknown item {item!r}", room=room, request_id=request_id)
                return
            value = body.get("value")
            if not isinstance(value, int) or not SURVEY_SCALE_MIN <= value <= SURVEY_SCALE_MAX:
                await self._send_error(
                    socket,
                    "bad_survey_value",
                    f"value must be an integer {SURVEY_SCALE_MIN}..{SURVEY_SCALE_MAX}",
                    room=room,
                    request_id=request_id,
                )
                return
            record = {
                "game_id": room.state.game_id,
                "room_code": room.code,
                "seat": seat.index,
                "player_id": room.player_id_for_seat(seat.index),
                "item": item,
                "value": value,
            }
            try:
                self._append_survey(room, record)
            except OSError as exc:
                await self._send_error(socket, "storage_failure", str(exc), room=room, request_id=request_id)
                return
            await self._send(
                socket,
                self._envelope(room, "action_ack", {"kind": "survey", "item": item, "value": value}, request_id),
            )


def create_app(settings: ServerSettings) -> FastAPI:
    manager = RoomManager(settings)

    @asynccontextmanager
    async def lifespan(app: FastAPI):
        manager.load()
        await manager.activate_restored()
        yield
        for room in manager.rooms.values():
            if room.timer is not None:
                room.timer.cancel()

    app = FastAPI(lifespan=lifespan)
    app.state.manager = manager

    @app.websocket("/ws")
    async def ws_endpoint(socket: WebSocket) -> None:
        await manager.handle_socket(socket)

    return app


def serve(
    host: str,
    port: int,
    storage_dir: str,
    round_timeout: float,
    room_files: list[str],
) -> None:
    import uvicorn

    settings = ServerSettings(
        storage_dir=Path(storage_dir),
        round_timeout=round_timeout,
        room_files=tuple(room_files),
    )
    app = create_app(settings)
    print(f"room server listening on ws://{host}:{port}/ws (storage: {storage_dir})")
    uvicorn.run(app, host=host, port=port, log_level="warning")
