"""Deterministic norm-compliance game: engine, bots, analytics, server."""

from .engine import (
    GameState,
    Phase,
    PlayerView,
    begin_round,
    new_game,
    player_view,
    replay,
    run_game,
    submit_round,
)
from .events import Event, read_event_log, write_event_log
from .model import (
    Action,
    AttackKind,
    Color,
    GameConfig,
    PlayerState,
    ProjectSize,
    Regime,
)
from .policies import PolicySpec, decide, run_bot_game

__all__ = [
    "Action",
    "AttackKind",
    "Color",
    "Event",
    "GameConfig",
    "GameState",
    "Phase",
    "PlayerState",
    "PlayerView",
    "PolicySpec",
    "ProjectSize",
    "Regime",
    "begin_round",
    "decide",
    "new_game",
    "player_view",
    "read_event_log",
    "replay",
    "run_bot_game",
    "run_game",
    "submit_round",
    "write_event_log",
]

__version__ = "0.1.0"
