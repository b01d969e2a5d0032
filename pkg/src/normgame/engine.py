"""Round engine: sequencing, event emission, and replay.

A game advances through an alternation of ``begin_round`` (sanction
bookkeeping plus manager observation) and ``submit_round`` (one action per
player resolved in seat order, then environment attacks).  Every state
change is emitted as an event, and ``replay`` folds an event list back into
the exact final state without consuming any randomness: attack and
observation outcomes are read from the log, and the random-stream position
is reconstructed from recorded draw counters.

Draw order is part of the contract.  Per game: one draw per project task
slot when initial projects roll, then per round one observation draw per
player in seat order, then per player in seat order one attack-exposure
draw plus one kind draw if the attack lands, plus one draw per task when a
banked project re-rolls.  Policies never touch this stream; they get their
own derived generators.
"""

from __future__ import annotations

import enum
import hashlib
import json
from dataclasses import dataclass, replace
from typing import Callable, Mapping, Sequence

from . import events as ev
from .events import CorruptLogError, Event
from .model import (
    COLOR_ORDER,
    SIZE_ORDER,
    Action,
    ActionKind,
    AttackKind,
    Color,
    GameConfig,
    ImmunitySlot,
    PlayerState,
    Project,
    ProjectSize,
    Regime,
    SanctionKind,
    SanctionStatus,
    apply_attack,
    apply_immunity_task,
    apply_project_task,
    compliance_status,
    is_action_enabled,
    new_player,
    sample_attack,
)
from .rng import GameRng


class LifecycleError(RuntimeError):
    pass


class ProtocolError(ValueError):
    pass


class AbortedGameError(RuntimeError):
    """A bot or other action source failed; carries the log so far."""

    def __init__(self, player_id: str, events: list[Event], cause: str) -> None:
        super().__init__(f"action source for {player_id} failed: {cause}")
        self.player_id = player_id
        self.events = events


class Phase(str, enum.Enum):
    BETWEEN_ROUNDS = "between-rounds"
    AWAITING_ACTIONS = "awaiting-actions"
    FINISHED = "finished"


@dataclass
class GameState:
    config: GameConfig
    game_id: str
    round: int
    players: list[PlayerState]
    rng: GameRng
    phase: Phase
    attack_count: int = 0
    manager_sanction_issuances: int = 0
    next_seq: int = 1

    def copy(self) -> GameState:
        return GameState(
            config=self.config,
            game_id=self.game_id,
            round=self.round,
            players=list(self.players),
            rng=self.rng.copy(),
            phase=self.phase,
            attack_count=self.attack_count,
            manager_sanction_issuances=self.manager_sanction_issuances,
            next_seq=self.next_seq,
        )

    def seat_of(self, player_id: str) -> int:
        for index, player in enumerate(self.players):
            if player.player_id == player_id:
                return index
        raise ProtocolError(f"unknown player id {player_id!r}")

    def player(self, player_id: str) -> PlayerState:
        return self.players[self.seat_of(player_id)]

    def set_player(self, player: PlayerState) -> None:
        self.players[self.seat_of(player.player_id)] = player


@dataclass(frozen=True)
class PeerView:
    """What one player may know about another: public signals only."""

    player_id: str
    seat: int
    score: int
    compliant: bool
    immunities: dict[Color, bool]
    sanctioned: bool

    def to_dict(self) -> dict:
        return {
            "player_id": self.player_id,
            "seat": self.seat,
            "score": self.score,
            "compliant": self.compliant,
            "immunities": {c.value: held for c, held in self.immunities.items()},
            "sanctioned": self.sanctioned,
        }


@dataclass(frozen=True)
class PlayerView:
    """One player's window on the game: own state in full, the shared
    rules, and public signals about peers.  Never peer project contents,
    never the engine's random stream."""

    game_id: str
    round: int
    phase: Phase
    seat: int
    config: GameConfig
    player: PlayerState
    peers: tuple[PeerView, ...]

    def to_dict(self) -> dict:
        return {
            "game_id": self.game_id,
            "round": self.round,
            "phase": self.phase.value,
            "seat": self.seat,
            "config": self.config.to_dict(),
            "player": serialize_player(self.player),
            "peers": [peer.to_dict() for peer in self.peers],
        }


def serialize_player(player: PlayerState) -> dict:
    slots = {}
    for color in COLOR_ORDER:
        slot = player.slots[color]
        slots[color.value] = {
            "status": slot.status.value,
            "lost_at_round": slot.lost_at_round,
            "deadline_round": slot.deadline_round,
            "capability_available": slot.capability_available,
        }
    projects = {}
    for size in SIZE_ORDER:
        project = player.projects[size]
        projects[size.value] = {
            "required": sorted_colors(project.required),
            "completed": sorted_colors(project.completed),
        }
    return {
        "player_id": player.player_id,
        "score": player.score,
        "risk_score": player.risk_score,
        "slots": slots,
        "projects": projects,
        "sanction": {
            "kind": player.sanction.kind.value,
            "rounds_remaining": player.sanction.rounds_remaining,
            "restore_colors": sorted_colors(player.sanction.restore_colors),
        },
    }


def sorted_colors(colors) -> list[str]:
    return [c.value for c in COLOR_ORDER if c in colors]


def serialize_state(state: GameState) -> dict:
    """Canonical full dump of a game state; same state, same dict."""
    return {
        "game_id": state.game_id,
        "round": state.round,
        "phase": state.phase.value,
        "config": state.config.to_dict(),
        "players": [serialize_player(p) for p in state.players],
        "rng": {"seed": state.rng.seed, "draws": state.rng.draws},
        "attack_count": state.attack_count,
        "manager_sanction_issuances": state.manager_sanction_issuances,
        "next_seq": state.next_seq,
    }


def state_digest(state: GameState) -> str:
    """Short stable fingerprint of a full state, for equality checks."""
    blob = json.dumps(serialize_state(state), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode("utf-8")).hexdigest()[:16]


def derive_game_id(config: GameConfig, risk_scores: Sequence[float]) -> str:
    """Stable id from the full setup, so identical runs emit identical logs."""
    blob = json.dumps(
        {"config": config.to_dict(), "risk_scores": list(risk_scores)},
        sort_keys=True,
        separators=(",", ":"),
    )
    return "g" + hashlib.sha256(blob.encode("utf-8")).hexdigest()[:12]


def new_game(
    config: GameConfig,
    risk_scores: Sequence[float] | None = None,
    game_id: str | None = None,
) -> tuple[GameState, list[Event]]:
    config.validate()
    scores = list(risk_scores) if risk_scores is not None else [0.0] * config.player_count
    if len(scores) != config.player_count:
        raise ProtocolError(
            f"expected {config.player_count} risk scores, got {len(scores)}"
        )
    if game_id is None:
        game_id = derive_game_id(config, scores)
    rng = GameRng(config.seed)
    players = [
        new_player(f"p{i}", rng, config, risk_score=scores[i])
        for i in range(config.player_count)
    ]
    state = GameState(
        config=config,
        game_id=game_id,
        round=1,
        players=players,
        rng=rng,
        phase=Phase.BETWEEN_ROUNDS,
    )
    payload = {
        "config": config.to_dict(),
        "players": [
            {
                "player_id": p.player_id,
                "risk_score": p.risk_score,
                "projects": {
                    size.value: sorted_colors(p.projects[size].required)
                    for size in SIZE_ORDER
                },
            }
            for p in players
        ],
    }
    event = Event(game_id, 0, state.next_seq, ev.GAME_CREATED, payload)
    state.next_seq += 1
    return state, [event]


def _emit(state: GameState, out: list[Event], kind: str, payload: dict) -> None:
    out.append(Event(state.game_id, state.round, state.next_seq, kind, payload))
    state.next_seq += 1


def _overdue_colors(player: PlayerState, round_number: int) -> list[Color]:
    return [
        color
        for color in COLOR_ORDER
        if not player.slots[color].held
        and round_number > player.slots[color].deadline_round
    ]


def _lift_sanctions(state: GameState, out: list[Event]) -> None:
    for player in list(state.players):
        sanction = player.sanction
        if not sanction.active:
            continue
        remaining = sanction.rounds_remaining - 1
        if remaining > 0:
            state.set_player(replace(player, sanction=replace(sanction, rounds_remaining=remaining)))
            continue
        restored = [c for c in COLOR_ORDER if c in sanction.restore_colors]
        updated = player
        for color in restored:
            updated = updated.with_slot(updated.slots[color].restore())
        updated = replace(updated, sanction=SanctionStatus.none())
        state.set_player(updated)
        _emit(
            state,
            out,
            ev.SANCTION_LIFTED,
            {
                "player_id": player.player_id,
                "sanction_kind": sanction.kind.value,
                "restored_colors": [c.value for c in restored],
            },
        )


def _manager_step(state: GameState, out: list[Event]) -> None:
    for player in list(state.players):
        observed = state.rng.uniform() < state.config.manager_observability
        if not observed:
            continue
        # Refetch: an earlier group sanction this round may have hit this seat.
        player = state.player(player.player_id)
        compliant = compliance_status(player, state.round)
        _emit(
            state,
            out,
            ev.MANAGER_OBSERVED,
            {"player_id": player.player_id, "compliant": compliant},
        )
        if compliant or player.sanction.kind is SanctionKind.MANAGER:
            continue
        overdue = _overdue_colors(player, state.round)
        duration = state.config.sanction_rounds_per_violation * len(overdue)
        if state.config.regime is Regime.GROUP:
            targets = list(state.players)
        else:
            targets = [player]
        sanctioned_payload = []
        for target in targets:
            restore = frozenset(overdue) if target.player_id == player.player_id else frozenset()
            state.set_player(
                replace(target, sanction=SanctionStatus.manager(duration, restore))
            )
            sanctioned_payload.append(
                {
                    "player_id": target.player_id,
                    "restore_colors": [c.value for c in COLOR_ORDER if c in restore],
                }
            )
        state.manager_sanction_issuances += 1
        _emit(
            state,
            out,
            ev.MANAGER_SANCTIONED,
            {
                "violator_id": player.player_id,
                "overdue_colors": [c.value for c in overdue],
                "duration": duration,
                "regime": state.config.regime.value,
                "sanctioned": sanctioned_payload,
            },
        )


def begin_round(state: GameState) -> tuple[GameState, list[Event]]:
    """Open the current round: lift expiring sanctions, run the manager."""
    if state.phase is Phase.FINISHED:
        raise LifecycleError("cannot begin a round: game is over")
    if state.phase is Phase.AWAITING_ACTIONS:
        raise LifecycleError(f"round {state.round} already begun")
    state = state.copy()
    out: list[Event] = []
    _emit(
        state,
        out,
        ev.ROUND_STARTED,
        {"round": state.round, "rng_draws": state.rng.draws},
    )
    _lift_sanctions(state, out)
    _manager_step(state, out)
    state.phase = Phase.AWAITING_ACTIONS
    return state, out


def _rejection_reason(
    state: GameState, player: PlayerState, action: Action, timed_out: bool
) -> str:
    if timed_out:
        return "timeout"
    if player.sanction.active and action.kind is not ActionKind.SKIP:
        return "sanctioned"
    if action.kind is ActionKind.SKIP:
        return "skip-while-unsanctioned"
    if action.kind is ActionKind.PROJECT_TASK:
        if action.size is None or action.color is None:
            return "malformed-action"
        project = player.projects[action.size]
        if action.color not in project.remaining:
            return "task-not-open"
        return "capability-lost"
    if action.kind is ActionKind.IMMUNITY_TASK:
        if action.color is None:
            return "malformed-action"
        return "immunity-held"
    if action.kind is ActionKind.PEER_SANCTION:
        if action.target_id is None:
            return "malformed-action"
        if action.target_id == player.player_id:
            return "self-target"
        if all(p.player_id != action.target_id for p in state.players):
            return "unknown-target"
        return "target-compliant"
    return "malformed-action"


def submit_round(
    state: GameState,
    actions: Mapping[str, Action],
    timed_out: frozenset[str] | set[str] = frozenset(),
) -> tuple[GameState, list[Event]]:
    """Resolve one action per player in seat order, then run attacks.

    Invalid actions are rejected on an event and resolve as Skip; the game
    never aborts on a bad action.  ``timed_out`` names players whose action
    was substituted by the caller after a deadline; their forced Skip is
    rejected with reason "timeout" when Skip is not legal for them.
    """
    if state.phase is Phase.FINISHED:
        raise LifecycleError("cannot submit actions: game is over")
    if state.phase is Phase.BETWEEN_ROUNDS:
        raise LifecycleError(f"round {state.round} has not begun")
    ids = [p.player_id for p in state.players]
    missing = [pid for pid in ids if pid not in actions]
    if missing:
        raise ProtocolError(f"missing actions for players: {missing}")
    unknown = [pid for pid in actions if pid not in ids]
    if unknown:
        raise ProtocolError(f"actions submitted for unknown players: {unknown}")
    state = state.copy()
    out: list[Event] = []
    # Peer sanctions land after the whole loop so that a target later in
    # seat order still resolves the action it chose this round.
    pending_sanctions: list[str] = []
    for pid in ids:
        player = state.player(pid)
        action = actions[pid]
        was_timed_out = pid in timed_out
        if was_timed_out:
            action = Action.skip()
        _emit(
            state,
            out,
            ev.ACTION_SUBMITTED,
            {"player_id": pid, "action": action.to_dict()},
        )
        peers = [p for p in state.players if p.player_id != pid]
        if not is_action_enabled(player, peers, action, state.round):
            _emit(
                state,
                out,
                ev.ACTION_REJECTED,
                {
                    "player_id": pid,
                    "action": action.to_dict(),
                    "reason": _rejection_reason(state, player, action, was_timed_out),
                    "sanctioned": player.sanction.active,
                },
            )
            continue
        payload: dict = {
            "player_id": pid,
            "action": action.to_dict(),
            "sanctioned": player.sanction.active,
        }
        if action.kind is ActionKind.SKIP:
            if was_timed_out:
                payload["timed_out"] = True
            _emit(state, out, ev.ACTION_APPLIED, payload)
        elif action.kind is ActionKind.IMMUNITY_TASK:
            state.set_player(apply_immunity_task(player, action.color))
            _emit(state, out, ev.ACTION_APPLIED, payload)
        elif action.kind is ActionKind.PROJECT_TASK:
            updated, banked, fresh = apply_project_task(
                player, action.size, action.color, state.rng, state.config
            )
            state.set_player(updated)
            payload["banked"] = banked
            _emit(state, out, ev.ACTION_APPLIED, payload)
            if fresh is not None:
                _emit(
                    state,
                    out,
                    ev.PROJECT_BANKED,
                    {
                        "player_id": pid,
                        "size": action.size.value,
                        "points": banked,
                        "new_required": sorted_colors(fresh.required),
                    },
                )
        elif action.kind is ActionKind.PEER_SANCTION:
            target = state.player(action.target_id)
            applied = (
                not target.sanction.active
                and action.target_id not in pending_sanctions
            )
            if applied:
                pending_sanctions.append(action.target_id)
            payload["target"] = action.target_id
            payload["applied"] = applied
            _emit(state, out, ev.ACTION_APPLIED, payload)
    for target_id in pending_sanctions:
        target = state.player(target_id)
        # +1 pre-compensates the decrement at the next begin_round, so the
        # target sits out exactly peer_sanction_duration rounds.
        state.set_player(
            replace(
                target,
                sanction=SanctionStatus.peer(state.config.peer_sanction_duration + 1),
            )
        )
    for pid in ids:
        kind = sample_attack(state.rng, state.config)
        if kind is None:
            continue
        player = state.player(pid)
        updated, lost, capability_lost, cleared = apply_attack(
            player, kind, state.round, state.config
        )
        state.set_player(updated)
        state.attack_count += 1
        _emit(
            state,
            out,
            ev.ATTACK,
            {
                "player_id": pid,
                "attack_kind": kind.value,
                "lost": [c.value for c in lost],
                "capability_lost": [c.value for c in capability_lost],
                "cleared_tasks": [[size.value, color.value] for size, color in cleared],
            },
        )
    if state.round >= state.config.rounds:
        state.phase = Phase.FINISHED
        _emit(
            state,
            out,
            ev.GAME_OVER,
            {
                "final_scores": {p.player_id: p.score for p in state.players},
                "rng_draws": state.rng.draws,
            },
        )
    else:
        state.round += 1
        state.phase = Phase.BETWEEN_ROUNDS
    return state, out


def player_view(state: GameState, player_id: str) -> PlayerView:
    """The information boundary: own state in full, peers as public signals."""
    seat = state.seat_of(player_id)
    peers = []
    for index, peer in enumerate(state.players):
        if peer.player_id == player_id:
            continue
        peers.append(
            PeerView(
                player_id=peer.player_id,
                seat=index,
                score=peer.score,
                compliant=compliance_status(peer, state.round),
                immunities={c: peer.slots[c].held for c in COLOR_ORDER},
                sanctioned=peer.sanction.active,
            )
        )
    return PlayerView(
        game_id=state.game_id,
        round=state.round,
        phase=state.phase,
        seat=seat,
        config=state.config,
        player=state.players[seat],
        peers=tuple(peers),
    )


def enabled_actions_from_view(view: PlayerView) -> list[Action]:
    """All legal actions for the viewer, in a fixed presentation order."""
    player = view.player
    if player.sanction.active:
        return [Action.skip()]
    actions: list[Action] = []
    for color in COLOR_ORDER:
        if not player.slots[color].held:
            actions.append(Action.immunity_task(color))
    for size in SIZE_ORDER:
        project = player.projects[size]
        for color in COLOR_ORDER:
            if color in project.remaining and player.slots[color].capability_available:
                actions.append(Action.project_task(size, color))
    for peer in view.peers:
        if not peer.compliant:
            actions.append(Action.peer_sanction(peer.player_id))
    return actions


ActionSource = Callable[[PlayerView], Action]


def run_game(
    config: GameConfig,
    action_sources: Mapping[str, ActionSource],
    seed: int | None = None,
    game_id: str | None = None,
    risk_scores: Sequence[float] | None = None,
) -> tuple[GameState, list[Event]]:
    """Drive a full game with one action source per player id."""
    if seed is not None:
        config = replace(config, seed=seed)
    state, log = new_game(config, risk_scores=risk_scores, game_id=game_id)
    expected = {p.player_id for p in state.players}
    if set(action_sources) != expected:
        raise ProtocolError(
            f"action sources {sorted(action_sources)} do not match players {sorted(expected)}"
        )
    while state.phase is not Phase.FINISHED:
        state, batch = begin_round(state)
        log.extend(batch)
        actions = {}
        for player in state.players:
            view = player_view(state, player.player_id)
            try:
                actions[player.player_id] = action_sources[player.player_id](view)
            except Exception as exc:
                raise AbortedGameError(player.player_id, log, repr(exc)) from exc
        state, batch = submit_round(state, actions)
        log.extend(batch)
    return state, log


# --- Replay ---------------------------------------------------------------


def _fail(event: Event, message: str) -> CorruptLogError:
    return CorruptLogError(f"event seq {event.seq}: {message}", seq=event.seq)


class _Replayer:
    """Folds an event list back into a GameState, verifying as it goes."""

    def __init__(self) -> None:
        self.state: GameState | None = None
        self.draws = 0
        self.expected_lifts: list[tuple[str, list[str]]] = []
        self.last_round_started = 0
        self.actions_this_round = 0

    def feed(self, event: Event) -> None:
        if self.state is None:
            if event.kind != ev.GAME_CREATED:
                raise _fail(event, f"log must start with {ev.GAME_CREATED}")
            self._on_game_created(event)
            return
        if event.game_id != self.state.game_id:
            raise _fail(event, "game id changed mid-log")
        handler = {
            ev.GAME_CREATED: self._on_duplicate_created,
            ev.ROUND_STARTED: self._on_round_started,
            ev.SANCTION_LIFTED: self._on_sanction_lifted,
            ev.MANAGER_OBSERVED: self._on_manager_observed,
            ev.MANAGER_SANCTIONED: self._on_manager_sanctioned,
            ev.ACTION_SUBMITTED: self._on_action_submitted,
            ev.ACTION_APPLIED: self._on_action_applied,
            ev.ACTION_REJECTED: self._on_noop,
            ev.ATTACK: self._on_attack,
            ev.PROJECT_BANKED: self._on_project_banked,
            ev.GAME_OVER: self._on_game_over,
        }[event.kind]
        handler(event)

    def _on_duplicate_created(self, event: Event) -> None:
        raise _fail(event, "second game-created event")

    def _on_game_created(self, event: Event) -> None:
        config = GameConfig.from_dict(event.payload["config"])
        players = []
        for entry in event.payload["players"]:
            slots = {color: ImmunitySlot(color=color) for color in COLOR_ORDER}
            projects = {}
            for size in SIZE_ORDER:
                colors = frozenset(Color(c) for c in entry["projects"][size.value])
                projects[size] = Project(size=size, required=colors)
            players.append(
                PlayerState(
                    player_id=entry["player_id"],
                    slots=slots,
                    projects=projects,
                    risk_score=entry["risk_score"],
                )
            )
        self.draws = config.player_count * sum(
            config.project_task_counts[size] for size in SIZE_ORDER
        )
        self.state = GameState(
            config=config,
            game_id=event.game_id,
            round=1,
            players=players,
            rng=GameRng(config.seed),  # repositioned at the end of the fold
            phase=Phase.BETWEEN_ROUNDS,
            next_seq=event.seq + 1,
        )

    def _on_round_started(self, event: Event) -> None:
        state = self.state
        if event.payload["round"] != self.last_round_started + 1:
            raise _fail(event, "round numbers must increase by one")
        if event.payload["rng_draws"] != self.draws:
            raise _fail(
                event,
                f"draw counter mismatch: log says {event.payload['rng_draws']}, "
                f"derived {self.draws}",
            )
        if self.expected_lifts:
            raise _fail(event, "missing sanction-lifted events for previous round")
        self.last_round_started = event.payload["round"]
        self.actions_this_round = 0
        state.round = event.payload["round"]
        state.phase = Phase.AWAITING_ACTIONS
        # Re-derive the deterministic lift step and queue what must follow.
        for player in list(state.players):
            sanction = player.sanction
            if not sanction.active:
                continue
            remaining = sanction.rounds_remaining - 1
            if remaining > 0:
                state.set_player(
                    replace(player, sanction=replace(sanction, rounds_remaining=remaining))
                )
                continue
            restored = [c for c in COLOR_ORDER if c in sanction.restore_colors]
            updated = player
            for color in restored:
                updated = updated.with_slot(updated.slots[color].restore())
            state.set_player(replace(updated, sanction=SanctionStatus.none()))
            self.expected_lifts.append((player.player_id, [c.value for c in restored]))
        self.draws += state.config.player_count  # observation draws
        state.next_seq = event.seq + 1

    def _on_sanction_lifted(self, event: Event) -> None:
        if not self.expected_lifts:
            raise _fail(event, "sanction-lifted without a due sanction")
        expected_id, expected_colors = self.expected_lifts.pop(0)
        if event.payload["player_id"] != expected_id:
            raise _fail(event, f"expected lift for {expected_id}")
        if event.payload["restored_colors"] != expected_colors:
            raise _fail(event, "restored colors disagree with sanction state")
        self.state.next_seq = event.seq + 1

    def _on_manager_observed(self, event: Event) -> None:
        state = self.state
        player = state.player(event.payload["player_id"])
        if event.payload["compliant"] != compliance_status(player, state.round):
            raise _fail(event, "recorded compliance disagrees with state")
        state.next_seq = event.seq + 1

    def _on_manager_sanctioned(self, event: Event) -> None:
        state = self.state
        violator = state.player(event.payload["violator_id"])
        overdue = [c.value for c in _overdue_colors(violator, state.round)]
        if event.payload["overdue_colors"] != overdue:
            raise _fail(event, "overdue colors disagree with state")
        expected_duration = state.config.sanction_rounds_per_violation * len(overdue)
        if event.payload["duration"] != expected_duration:
            raise _fail(
                event,
                f"duration {event.payload['duration']} != expected {expected_duration}",
            )
        for entry in event.payload["sanctioned"]:
            target = state.player(entry["player_id"])
            restore = frozenset(Color(c) for c in entry["restore_colors"])
            state.set_player(
                replace(
                    target,
                    sanction=SanctionStatus.manager(event.payload["duration"], restore),
                )
            )
        state.manager_sanction_issuances += 1
        state.next_seq = event.seq + 1

    def _on_noop(self, event: Event) -> None:
        self.state.next_seq = event.seq + 1

    def _on_action_submitted(self, event: Event) -> None:
        self.actions_this_round += 1
        if self.actions_this_round == self.state.config.player_count:
            # All actions in: the attack phase ran, one exposure draw each.
            self.draws += self.state.config.player_count
        self.state.next_seq = event.seq + 1

    def _on_action_applied(self, event: Event) -> None:
        state = self.state
        action = Action.from_dict(event.payload["action"])
        player = state.player(event.payload["player_id"])
        if action.kind is ActionKind.IMMUNITY_TASK:
            state.set_player(apply_immunity_task(player, action.color))
        elif action.kind is ActionKind.PROJECT_TASK:
            project = player.projects[action.size]
            if action.color not in project.remaining:
                raise _fail(event, "applied project task was not open")
            state.set_player(
                player.with_project(
                    replace(project, completed=project.completed | {action.color})
                )
            )
        elif action.kind is ActionKind.PEER_SANCTION:
            if event.payload["applied"]:
                target = state.player(event.payload["target"])
                state.set_player(
                    replace(
                        target,
                        sanction=SanctionStatus.peer(
                            state.config.peer_sanction_duration + 1
                        ),
                    )
                )
        state.next_seq = event.seq + 1

    def _on_attack(self, event: Event) -> None:
        state = self.state
        player = state.player(event.payload["player_id"])
        kind = AttackKind(event.payload["attack_kind"])
        updated, lost, capability_lost, cleared = apply_attack(
            player, kind, state.round, state.config
        )
        recorded = (
            event.payload["lost"],
            event.payload["capability_lost"],
            event.payload["cleared_tasks"],
        )
        derived = (
            [c.value for c in lost],
            [c.value for c in capability_lost],
            [[size.value, color.value] for size, color in cleared],
        )
        if recorded != derived:
            raise _fail(event, f"attack effects disagree: log {recorded}, derived {derived}")
        state.set_player(updated)
        state.attack_count += 1
        self.draws += 1  # kind draw
        state.next_seq = event.seq + 1

    def _on_project_banked(self, event: Event) -> None:
        state = self.state
        player = state.player(event.payload["player_id"])
        size = ProjectSize(event.payload["size"])
        if event.payload["points"] != state.config.project_scores[size]:
            raise _fail(event, "banked points disagree with config")
        if player.projects[size].remaining:
            raise _fail(event, "banked project was not complete")
        fresh = Project(
            size=size,
            required=frozenset(Color(c) for c in event.payload["new_required"]),
        )
        player = player.with_project(fresh)
        state.set_player(replace(player, score=player.score + event.payload["points"]))
        self.draws += state.config.project_task_counts[size]
        state.next_seq = event.seq + 1

    def _on_game_over(self, event: Event) -> None:
        state = self.state
        for pid, score in event.payload["final_scores"].items():
            if state.player(pid).score != score:
                raise _fail(event, f"final score for {pid} disagrees with state")
        if event.payload["rng_draws"] != self.draws:
            raise _fail(
                event,
                f"final draw counter mismatch: log says {event.payload['rng_draws']}, "
                f"derived {self.draws}",
            )
        state.round = state.config.rounds
        state.phase = Phase.FINISHED
        state.next_seq = event.seq + 1

    def finish(self) -> GameState:
        if self.state is None:
            raise CorruptLogError("empty event log")
        state = self.state
        if state.phase is Phase.FINISHED and self.expected_lifts:
            raise CorruptLogError("missing sanction-lifted events at game end")
        state.rng = GameRng(state.config.seed, self.draws)
        return state


def replay(log: Sequence[Event]) -> GameState:
    """Rebuild the final state from events alone.

    The fold re-derives deterministic transitions, reads random outcomes
    from the log, and repositions the random stream from draw counters, so
    a full log reproduces the live final state field for field.  A log cut
    off mid-game folds to the state as of its last recorded event.
    """
    event_list = list(log)
    ev.check_sequence(event_list)
    replayer = _Replayer()
    for event in event_list:
        replayer.feed(event)
    return replayer.finish()
