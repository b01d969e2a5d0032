"""Core domain model for the norm-compliance game.

A team of workers completes colored project tasks for score while an
environment launches attacks against three per-worker protections
("immunities": blue, red, yellow).  A lost immunity must be repaired within a
deadline; letting it lapse makes the worker noncompliant and exposed to a
second hit that disables the matching work capability and wipes unbanked
task progress of that color.  A manager sanctions observed noncompliance,
either individually or against the whole group, and workers can sanction
noncompliant peers themselves.

Everything in this module is a plain value plus pure transition functions;
randomness comes in only through an explicitly passed stream.  The engine
module sequences these transitions into rounds.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field, replace

from .rng import GameRng


class Color(str, enum.Enum):
    BLUE = "blue"
    RED = "red"
    YELLOW = "yellow"


COLOR_ORDER: tuple[Color, ...] = (Color.BLUE, Color.RED, Color.YELLOW)


class ProjectSize(str, enum.Enum):
    SMALL = "small"
    MEDIUM = "medium"
    LARGE = "large"


SIZE_ORDER: tuple[ProjectSize, ...] = (
    ProjectSize.SMALL,
    ProjectSize.MEDIUM,
    ProjectSize.LARGE,
)


class AttackKind(str, enum.Enum):
    """One colored attack per immunity, plus a compound black attack."""

    BLUE = "blue"
    RED = "red"
    YELLOW = "yellow"
    BLACK = "black"

    def affected_colors(self) -> tuple[Color, ...]:
        if self is AttackKind.BLACK:
            return COLOR_ORDER
        return (Color(self.value),)


ATTACK_KIND_ORDER: tuple[AttackKind, ...] = (
    AttackKind.BLUE,
    AttackKind.RED,
    AttackKind.YELLOW,
    AttackKind.BLACK,
)


class Regime(str, enum.Enum):
    INDIVIDUAL = "individual"
    GROUP = "group"


class ConfigError(ValueError):
    pass


class InvalidActionError(ValueError):
    pass


@dataclass(frozen=True)
class GameConfig:
    rounds: int = 40
    attack_probability: float = 0.35
    manager_observability: float = 0.33
    immunity_deadline: int = 3
    project_scores: dict[ProjectSize, int] = field(
        default_factory=lambda: {
            ProjectSize.SMALL: 10,
            ProjectSize.MEDIUM: 25,
            ProjectSize.LARGE: 45,
        }
    )
    project_task_counts: dict[ProjectSize, int] = field(
        default_factory=lambda: {
            ProjectSize.SMALL: 1,
            ProjectSize.MEDIUM: 2,
            ProjectSize.LARGE: 3,
        }
    )
    sanction_rounds_per_violation: int = 2
    peer_sanction_duration: int = 1
    attack_kind_weights: dict[AttackKind, float] = field(
        default_factory=lambda: {
            AttackKind.BLUE: 3.0,
            AttackKind.RED: 3.0,
            AttackKind.YELLOW: 3.0,
            AttackKind.BLACK: 1.0,
        }
    )
    regime: Regime = Regime.INDIVIDUAL
    player_count: int = 4
    seed: int = 0

    def __post_init__(self) -> None:
        if not isinstance(self.regime, Regime):
            object.__setattr__(self, "regime", Regime(self.regime))

    def validate(self) -> None:
        if self.rounds < 1:
            raise ConfigError(f"rounds must be >= 1, got {self.rounds}")
        if not 0.0 <= self.attack_probability <= 1.0:
            raise ConfigError(
                f"attack_probability must be in [0, 1], got {self.attack_probability}"
            )
        if not 0.0 <= self.manager_observability <= 1.0:
            raise ConfigError(
                f"manager_observability must be in [0, 1], got {self.manager_observability}"
            )
        if self.immunity_deadline < 1:
            raise ConfigError(
                f"immunity_deadline must be >= 1, got {self.immunity_deadline}"
            )
        if self.sanction_rounds_per_violation < 1:
            raise ConfigError(
                "sanction_rounds_per_violation must be >= 1, got "
                f"{self.sanction_rounds_per_violation}"
            )
        if self.peer_sanction_duration < 1:
            raise ConfigError(
                f"peer_sanction_duration must be >= 1, got {self.peer_sanction_duration}"
            )
        if not 2 <= self.player_count <= 5:
            raise ConfigError(
                f"player_count must be between 2 and 5, got {self.player_count}"
            )
        for size in SIZE_ORDER:
            if self.project_scores.get(size, 0) <= 0:
                raise ConfigError(f"project score for {size.value} must be positive")
            count = self.project_task_counts.get(size, 0)
            if not 1 <= count <= len(COLOR_ORDER):
                raise ConfigError(
                    f"task count for {size.value} must be between 1 and "
                    f"{len(COLOR_ORDER)}, got {count}"
                )
        weights = [self.attack_kind_weights.get(kind, 0.0) for kind in ATTACK_KIND_ORDER]
        if any(w < 0 for w in weights) or sum(weights) <= 0:
            raise ConfigError("attack_kind_weights must be nonnegative with a positive sum")

    def to_dict(self) -> dict:
        return {
            "rounds": self.rounds,
            "attack_probability": self.attack_probability,
            "manager_observability": self.manager_observability,
            "immunity_deadline": self.immunity_deadline,
            "project_scores": {s.value: self.project_scores[s] for s in SIZE_ORDER},
            "project_task_counts": {
                s.value: self.project_task_counts[s] for s in SIZE_ORDER
            },
            "sanction_rounds_per_violation": self.sanction_rounds_per_violation,
            "peer_sanction_duration": self.peer_sanction_duration,
            "attack_kind_weights": {
                k.value: self.attack_kind_weights[k] for k in ATTACK_KIND_ORDER
            },
            "regime": self.regime.value,
            "player_count": self.player_count,
            "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, data: dict) -> GameConfig:
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        kwargs: dict = {}
        for key, value in data.items():
            if key == "project_scores":
                kwargs[key] = {ProjectSize(s): int(v) for s, v in value.items()}
            elif key == "project_task_counts":
                kwargs[key] = {ProjectSize(s): int(v) for s, v in value.items()}
            elif key == "attack_kind_weights":
                kwargs[key] = {AttackKind(k): float(v) for k, v in value.items()}
            elif key == "regime":
                kwargs[key] = Regime(value)
            else:
                kwargs[key] = value
        config = cls(**kwargs)
        config.validate()
        return config


class ImmunityStatus(str, enum.Enum):
    HELD = "held"
    LOST = "lost"


@dataclass(frozen=True)
class ImmunitySlot:
    """One color's protection for one player.

    While lost, ``deadline_round`` is the last round on which repairing it
    still counts as compliant; ``capability_available`` tracks whether the
    matching work capability survived.  A lost capability implies a lost
    immunity, never the other way around.
    """

    color: Color
    status: ImmunityStatus = ImmunityStatus.HELD
    lost_at_round: int | None = None
    deadline_round: int | None = None
    capability_available: bool = True

    @property
    def held(self) -> bool:
        return self.status is ImmunityStatus.HELD

    def lose_immunity(self, round_number: int, deadline: int) -> ImmunitySlot:
        return replace(
            self,
            status=ImmunityStatus.LOST,
            lost_at_round=round_number,
            deadline_round=round_number + deadline,
        )

    def lose_capability(self) -> ImmunitySlot:
        return replace(self, capability_available=False)

    def restore(self) -> ImmunitySlot:
        return ImmunitySlot(color=self.color)


@dataclass(frozen=True)
class Project:
    """An always-live project of one size; banked and re-rolled when done."""

    size: ProjectSize
    required: frozenset[Color]
    completed: frozenset[Color] = frozenset()

    @property
    def remaining(self) -> frozenset[Color]:
        return self.required - self.completed


def roll_project(rng: GameRng, size: ProjectSize, config: GameConfig) -> Project:
    count = config.project_task_counts[size]
    colors = rng.pick_distinct(list(COLOR_ORDER), count)
    return Project(size=size, required=frozenset(colors))


class SanctionKind(str, enum.Enum):
    NONE = "none"
    MANAGER = "manager"
    PEER = "peer"


@dataclass(frozen=True)
class SanctionStatus:
    kind: SanctionKind = SanctionKind.NONE
    rounds_remaining: int = 0
    # Immunities restored when a manager sanction lifts.  Empty for peer
    # sanctions and for bystanders swept up in a group sanction.
    restore_colors: frozenset[Color] = frozenset()

    @classmethod
    def none(cls) -> SanctionStatus:
        return cls()

    @classmethod
    def manager(cls, rounds: int, restore: frozenset[Color]) -> SanctionStatus:
        return cls(SanctionKind.MANAGER, rounds, restore)

    @classmethod
    def peer(cls, rounds: int) -> SanctionStatus:
        return cls(SanctionKind.PEER, rounds)

    @property
    def active(self) -> bool:
        return self.kind is not SanctionKind.NONE


@dataclass(frozen=True)
class PlayerState:
    player_id: str
    slots: dict[Color, ImmunitySlot]
    projects: dict[ProjectSize, Project]
    score: int = 0
    sanction: SanctionStatus = field(default_factory=SanctionStatus.none)
    risk_score: float = 0.0

    def with_slot(self, slot: ImmunitySlot) -> PlayerState:
        slots = dict(self.slots)
        slots[slot.color] = slot
        return replace(self, slots=slots)

    def with_project(self, project: Project) -> PlayerState:
        projects = dict(self.projects)
        projects[project.size] = project
        return replace(self, projects=projects)


def new_player(
    player_id: str, rng: GameRng, config: GameConfig, risk_score: float = 0.0
) -> PlayerState:
    """Fresh player: all immunities held, one rolled project per size."""
    slots = {color: ImmunitySlot(color=color) for color in COLOR_ORDER}
    projects = {size: roll_project(rng, size, config) for size in SIZE_ORDER}
    return PlayerState(
        player_id=player_id, slots=slots, projects=projects, risk_score=risk_score
    )


class ActionKind(str, enum.Enum):
    PROJECT_TASK = "project_task"
    IMMUNITY_TASK = "immunity_task"
    PEER_SANCTION = "peer_sanction"
    SKIP = "skip"


@dataclass(frozen=True)
class Action:
    kind: ActionKind
    size: ProjectSize | None = None
    color: Color | None = None
    target_id: str | None = None

    @classmethod
    def project_task(cls, size: ProjectSize, color: Color) -> Action:
        return cls(ActionKind.PROJECT_TASK, size=size, color=color)

    @classmethod
    def immunity_task(cls, color: Color) -> Action:
        return cls(ActionKind.IMMUNITY_TASK, color=color)

    @classmethod
    def peer_sanction(cls, target_id: str) -> Action:
        return cls(ActionKind.PEER_SANCTION, target_id=target_id)

    @classmethod
    def skip(cls) -> Action:
        return cls(ActionKind.SKIP)

    def to_dict(self) -> dict:
        data: dict = {"kind": self.kind.value}
        if self.size is not None:
            data["size"] = self.size.value
        if self.color is not None:
            data["color"] = self.color.value
        if self.target_id is not None:
            data["target"] = self.target_id
        return data

    @classmethod
    def from_dict(cls, data: dict) -> Action:
        kind = ActionKind(data["kind"])
        return cls(
            kind,
            size=ProjectSize(data["size"]) if "size" in data else None,
            color=Color(data["color"]) if "color" in data else None,
            target_id=data.get("target"),
        )


def compliance_status(player: PlayerState, round_number: int) -> bool:
    """True while compliant.

    A lost immunity keeps the player compliant through its deadline round
    inclusive; the first noncompliant round is deadline_round + 1.
    """
    for slot in player.slots.values():
        if not slot.held and round_number > slot.deadline_round:
            return False
    return True


def is_action_enabled(
    player: PlayerState,
    peers: list[PlayerState],
    action: Action,
    round_number: int,
) -> bool:
    """Decide whether ``action`` is legal for ``player`` right now.

    Skip is the one move of a sanctioned player; everything else requires
    being unsanctioned plus the action's own conditions.
    """
    if action.kind is ActionKind.SKIP:
        return player.sanction.active
    if player.sanction.active:
        return False
    if action.kind is ActionKind.PROJECT_TASK:
        if action.size is None or action.color is None:
            return False
        project = player.projects.get(action.size)
        if project is None or action.color not in project.remaining:
            return False
        return player.slots[action.color].capability_available
    if action.kind is ActionKind.IMMUNITY_TASK:
        if action.color is None:
            return False
        return not player.slots[action.color].held
    if action.kind is ActionKind.PEER_SANCTION:
        if action.target_id is None or action.target_id == player.player_id:
            return False
        target = next((p for p in peers if p.player_id == action.target_id), None)
        if target is None:
            return False
        return not compliance_status(target, round_number)
    return False


def apply_attack(
    player: PlayerState, kind: AttackKind, round_number: int, config: GameConfig
) -> tuple[PlayerState, list[Color], list[Color], list[tuple[ProjectSize, Color]]]:
    """Apply one attack; a black attack hits all three colors at once.

    Per color: a held immunity is lost with a fresh deadline; an already
    lost immunity whose capability survives loses the capability and all
    unbanked completed tasks of that color; a fully degraded color is
    unaffected.  Returns the player plus the lost colors, the colors whose
    capability fell, and the cleared (size, color) task pairs.
    """
    lost: list[Color] = []
    capability_lost: list[Color] = []
    cleared: list[tuple[ProjectSize, Color]] = []
    for color in kind.affected_colors():
        slot = player.slots[color]
        if slot.held:
            player = player.with_slot(
                slot.lose_immunity(round_number, config.immunity_deadline)
            )
            lost.append(color)
        elif slot.capability_available:
            player = player.with_slot(slot.lose_capability())
            capability_lost.append(color)
            for size in SIZE_ORDER:
                project = player.projects[size]
                if color in project.completed:
                    player = player.with_project(
                        replace(project, completed=project.completed - {color})
                    )
                    cleared.append((size, color))
    return player, lost, capability_lost, cleared


def apply_immunity_task(player: PlayerState, color: Color) -> PlayerState:
    """Repair one lost immunity, restoring its capability with it."""
    slot = player.slots[color]
    if slot.held:
        raise InvalidActionError(
            f"{player.player_id} cannot repair {color.value}: immunity is held"
        )
    return player.with_slot(slot.restore())


def apply_project_task(
    player: PlayerState,
    size: ProjectSize,
    color: Color,
    rng: GameRng,
    config: GameConfig,
) -> tuple[PlayerState, int, Project | None]:
    """Complete one project task; bank and re-roll on project completion.

    Returns (player, banked points, replacement project).  Banked points are
    zero and the replacement is None unless this task finished the project.
    """
    project = player.projects[size]
    if color not in project.remaining:
        raise InvalidActionError(
            f"{player.player_id} cannot work {color.value} on the {size.value} "
            "project: task not open"
        )
    if not player.slots[color].capability_available:
        raise InvalidActionError(
            f"{player.player_id} cannot work {color.value}: capability lost"
        )
    project = replace(project, completed=project.completed | {color})
    if project.remaining:
        return player.with_project(project), 0, None
    points = config.project_scores[size]
    fresh = roll_project(rng, size, config)
    player = player.with_project(fresh)
    player = replace(player, score=player.score + points)
    return player, points, fresh


def sample_attack(rng: GameRng, config: GameConfig) -> AttackKind | None:
    """Draw this round's attack against one player, if any.

    One exposure draw decides whether an attack lands; only then does a
    second draw pick the kind by weight.  The two-draw shape is part of the
    logged-draw accounting and must not change.
    """
    if rng.uniform() >= config.attack_probability:
        return None
    weights = [config.attack_kind_weights[kind] for kind in ATTACK_KIND_ORDER]
    return rng.pick_weighted(list(ATTACK_KIND_ORDER), weights)
