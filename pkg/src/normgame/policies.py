"""Bot policies.

Each policy is a pure decision function over a PlayerView plus a
policy-local random generator; bots never touch the engine's stream, so
adding or swapping bots cannot perturb attack or observation draws.  The
local generator is re-derived from (game seed, player id, seed offset,
round), which makes decisions reproducible and lets a restarted server
resume bots mid-game.

Policies only emit actions that pass the engine's enablement check.  A
sanctioned bot always skips; an unsanctioned bot always has a real move
(a blocked project color implies a lost immunity, which is repairable), so
no policy except the deliberate always-skip baseline ever submits a move
the engine would reject.
"""

from __future__ import annotations

import hashlib
import random
from dataclasses import dataclass
from typing import Mapping, Sequence

from .engine import ActionSource, PlayerView, run_game
from .model import COLOR_ORDER, SIZE_ORDER, Action, GameConfig, PlayerState

COMPLIANT_FIRST = "compliant-first"
DEADLINE_PROCRASTINATOR = "deadline-procrastinator"
NEGLIGENT = "negligent"
GREEDY_SCORE = "greedy-score"
RANDOM = "random"
RISK_WEIGHTED = "risk-weighted"
ALWAYS_SKIP = "always-skip"

POLICY_KINDS = frozenset(
    {
        COMPLIANT_FIRST,
        DEADLINE_PROCRASTINATOR,
        NEGLIGENT,
        GREEDY_SCORE,
        RANDOM,
        RISK_WEIGHTED,
        ALWAYS_SKIP,
    }
)


class PolicyError(ValueError):
    pass


@dataclass(frozen=True)
class PolicySpec:
    kind: str
    theta: float = 0.0
    enforce: float = 0.0
    seed_offset: int = 0

    def validate(self) -> None:
        if self.kind not in POLICY_KINDS:
            raise PolicyError(f"unknown policy kind {self.kind!r}")
        if not 0.0 <= self.theta <= 1.0:
            raise PolicyError(f"theta must be in [0, 1], got {self.theta}")
        if not 0.0 <= self.enforce <= 1.0:
            raise PolicyError(f"enforce must be in [0, 1], got {self.enforce}")

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "theta": self.theta,
            "enforce": self.enforce,
            "seed_offset": self.seed_offset,
        }

    @classmethod
    def from_dict(cls, data: dict) -> PolicySpec:
        spec = cls(
            kind=data["kind"],
            theta=float(data.get("theta", 0.0)),
            enforce=float(data.get("enforce", 0.0)),
            seed_offset=int(data.get("seed_offset", 0)),
        )
        spec.validate()
        return spec


def _lost_slots(player: PlayerState, capability_lost_only: bool = False):
    slots = [s for s in player.slots.values() if not s.held]
    if capability_lost_only:
        slots = [s for s in slots if not s.capability_available]
    return slots


def _most_urgent_repair(player: PlayerState, capability_lost_only: bool = False) -> Action | None:
    slots = _lost_slots(player, capability_lost_only)
    if not slots:
        return None
    slots.sort(key=lambda s: (s.deadline_round, COLOR_ORDER.index(s.color)))
    return Action.immunity_task(slots[0].color)


def _project_candidates(view: PlayerView) -> list[tuple[float, int, int, Action]]:
    player = view.player
    candidates = []
    for size_index, size in enumerate(SIZE_ORDER):
        project = player.projects[size]
        remaining = project.remaining
        if not remaining:
            continue
        # Value of a task: points banked per remaining task if this project
        # is driven home.
        value = view.config.project_scores[size] / len(remaining)
        for color_index, color in enumerate(COLOR_ORDER):
            if color in remaining and player.slots[color].capability_available:
                candidates.append(
                    (value, size_index, color_index, Action.project_task(size, color))
                )
    return candidates


def _best_project_task(view: PlayerView) -> Action | None:
    candidates = _project_candidates(view)
    if not candidates:
        return None
    candidates.sort(key=lambda item: (-item[0], item[1], item[2]))
    return candidates[0][3]


def _safe_sanction_targets(view: PlayerView) -> list[str]:
    """Noncompliant, unsanctioned peers seated after the viewer.

    Earlier seats may repair before this bot's action resolves, which would
    turn the sanction into a rejected move; later seats cannot change state
    before resolution, so targeting them is always accepted.  Peers already
    under a sanction are skipped: a second sanction would not apply and the
    turn would be wasted.
    """
    return [
        peer.player_id
        for peer in view.peers
        if not peer.compliant and not peer.sanctioned and peer.seat > view.seat
    ]


def decide(spec: PolicySpec, view: PlayerView, rng: random.Random) -> Action:
    """Pick this round's action for one bot."""
    spec.validate()
    player = view.player
    if spec.kind == ALWAYS_SKIP:
        return Action.skip()
    if player.sanction.active:
        return Action.skip()
    if spec.kind == COMPLIANT_FIRST:
        return _most_urgent_repair(player) or _best_project_task(view)
    if spec.kind == DEADLINE_PROCRASTINATOR:
        due = [
            s
            for s in _lost_slots(player)
            if s.deadline_round is not None and s.deadline_round <= view.round
        ]
        if due:
            due.sort(key=lambda s: (s.deadline_round, COLOR_ORDER.index(s.color)))
            return Action.immunity_task(due[0].color)
        return _best_project_task(view) or _most_urgent_repair(player)
    if spec.kind == NEGLIGENT:
        repair = _most_urgent_repair(player, capability_lost_only=True)
        if repair is not None:
            return repair
        return _best_project_task(view) or _most_urgent_repair(player)
    if spec.kind == GREEDY_SCORE:
        return _best_project_task(view) or _most_urgent_repair(player)
    if spec.kind == RANDOM:
        choices = [c[3] for c in _project_candidates(view)]
        for slot in _lost_slots(player):
            choices.append(Action.immunity_task(slot.color))
        for target in _safe_sanction_targets(view):
            choices.append(Action.peer_sanction(target))
        return choices[rng.randrange(len(choices))]
    if spec.kind == RISK_WEIGHTED:
        best_project = _best_project_task(view)
        if best_project is None:
            return _most_urgent_repair(player)
        lost = _lost_slots(player)
        if lost:
            lost.sort(key=lambda s: (s.deadline_round, COLOR_ORDER.index(s.color)))
            slot = lost[0]
            window = slot.deadline_round - slot.lost_at_round
            elapsed = min(1.0, (view.round - slot.lost_at_round) / window)
            # Tolerate delay through a theta share of the repair window;
            # theta=0 repairs at first sight, theta=1 waits past any window.
            if elapsed > spec.theta:
                return Action.immunity_task(slot.color)
        if spec.enforce > 0.0:
            targets = _safe_sanction_targets(view)
            if targets and rng.random() < spec.enforce:
                return Action.peer_sanction(targets[0])
        return best_project
    raise PolicyError(f"unknown policy kind {spec.kind!r}")


def derive_policy_seed(
    game_seed: int, player_id: str, seed_offset: int, round_number: int
) -> int:
    text = f"{game_seed}:{player_id}:{seed_offset}:{round_number}"
    return int.from_bytes(hashlib.sha256(text.encode("utf-8")).digest()[:8], "big")


def make_action_source(
    spec: PolicySpec, game_seed: int, player_id: str
) -> ActionSource:
    spec.validate()

    def source(view: PlayerView) -> Action:
        rng = random.Random(
            derive_policy_seed(game_seed, player_id, spec.seed_offset, view.round)
        )
        return decide(spec, view, rng)

    return source


def run_bot_game(
    config: GameConfig,
    specs: Mapping[str, PolicySpec] | Sequence[PolicySpec],
    seed: int | None = None,
    game_id: str | None = None,
    risk_scores: Sequence[float] | None = None,
):
    """Run a full game where every seat is a bot."""
    game_seed = config.seed if seed is None else seed
    ids = [f"p{i}" for i in range(config.player_count)]
    if isinstance(specs, Mapping):
        by_id = dict(specs)
    else:
        if len(specs) != config.player_count:
            raise PolicyError(
                f"expected {config.player_count} policies, got {len(specs)}"
            )
        by_id = {pid: spec for pid, spec in zip(ids, specs)}
    sources = {
        pid: make_action_source(spec, game_seed, pid) for pid, spec in by_id.items()
    }
    return run_game(config, sources, seed=seed, game_id=game_id, risk_scores=risk_scores)
