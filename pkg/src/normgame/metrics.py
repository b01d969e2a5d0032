"""Per-player outcome metrics over a finished game log, and comparisons.

Metrics are computed from the event stream alone, so they are identical
for a live run and for its replayed log.  Undefined ratios (no losses, no
attacks, no completed tasks) are carried as absent values, written as
empty CSV cells, and excluded pair-wise from comparisons rather than being
coerced to zero.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, fields, replace
from pathlib import Path
from typing import Sequence

from . import events as ev
from .events import Event, check_sequence
from .model import Color, GameConfig
from .stats import StatsError, TestResult, paired_comparison

SCHEMA_VERSION = "1"


class MetricsError(ValueError):
    pass


class PairingError(StatsError):
    pass


class SchemaError(ValueError):
    pass


@dataclass(frozen=True)
class MetricsRecord:
    game_id: str
    player_id: str
    participant: str
    regime: str
    immunity_loss_count: int
    immunity_repaired_before_deadline_count: int
    compliance_rate: float | None
    manager_sanction_issuances: int
    attacks_in_game: int
    sanctions_per_100_attacks: float | None
    score: int
    rounds_skipped: int
    resilience_mean_rounds: float | None
    censored_loss_count: int
    peer_sanctions_issued: int
    project_tasks_completed: int
    score_per_task: float | None


@dataclass
class _LossSpan:
    loss_round: int
    deadline_round: int
    regain_round: int | None = None


def compute_metrics(log: Sequence[Event]) -> list[MetricsRecord]:
    """One record per player from one complete game log."""
    events = list(log)
    if not events:
        raise MetricsError("empty event log")
    check_sequence(events)
    if events[0].kind != ev.GAME_CREATED:
        raise MetricsError("log must start with the game-created event")
    config = GameConfig.from_dict(events[0].payload["config"])
    game_id = events[0].game_id
    player_ids = [p["player_id"] for p in events[0].payload["players"]]

    spans: dict[str, dict[Color, _LossSpan]] = {pid: {} for pid in player_ids}
    closed: dict[str, list[_LossSpan]] = {pid: [] for pid in player_ids}
    rounds_skipped = {pid: 0 for pid in player_ids}
    peer_sanctions = {pid: 0 for pid in player_ids}
    tasks_completed = {pid: 0 for pid in player_ids}
    attacks = 0
    issuances = 0
    final_scores: dict[str, int] | None = None

    def close_span(pid: str, color: Color, round_number: int) -> None:
        span = spans[pid].pop(color, None)
        if span is not None:
            span.regain_round = round_number
            closed[pid].append(span)

    for event in events:
        if event.kind == ev.ATTACK:
            attacks += 1
            pid = event.payload["player_id"]
            for name in event.payload["lost"]:
                color = Color(name)
                spans[pid][color] = _LossSpan(
                    loss_round=event.round,
                    deadline_round=event.round + config.immunity_deadline,
                )
        elif event.kind == ev.MANAGER_SANCTIONED:
            issuances += 1
        elif event.kind == ev.SANCTION_LIFTED:
            pid = event.payload["player_id"]
            for name in event.payload["restored_colors"]:
                close_span(pid, Color(name), event.round)
        elif event.kind == ev.ACTION_APPLIED:
            pid = event.payload["player_id"]
            action = event.payload["action"]
            kind = action["kind"]
            if kind == "immunity_task":
                close_span(pid, Color(action["color"]), event.round)
            elif kind == "project_task":
                tasks_completed[pid] += 1
            elif kind == "peer_sanction":
                peer_sanctions[pid] += 1
            elif kind == "skip" and event.payload["sanctioned"]:
                rounds_skipped[pid] += 1
        elif event.kind == ev.ACTION_REJECTED:
            if event.payload["sanctioned"]:
                rounds_skipped[event.payload["player_id"]] += 1
        elif event.kind == ev.GAME_OVER:
            final_scores = event.payload["final_scores"]

    if final_scores is None:
        raise MetricsError("log has no game-over event; metrics need a finished game")

    per100 = 100.0 * issuances / attacks if attacks > 0 else None
    records = []
    for pid in player_ids:
        all_spans = closed[pid] + list(spans[pid].values())
        losses = len(all_spans)
        repaired = sum(
            1
            for span in all_spans
            if span.regain_round is not None and span.regain_round <= span.deadline_round
        )
        censored = sum(1 for span in all_spans if span.regain_round is None)
        durations = [
            (span.regain_round - span.loss_round)
            if span.regain_round is not None
            else (config.rounds - span.loss_round)
            for span in all_spans
        ]
        resilience = sum(durations) / losses if losses else None
        score = final_scores[pid]
        tasks = tasks_completed[pid]
        records.append(
            MetricsRecord(
                game_id=game_id,
                player_id=pid,
                participant="",
                regime=config.regime.value,
                immunity_loss_count=losses,
                immunity_repaired_before_deadline_count=repaired,
                compliance_rate=repaired / losses if losses else None,
                manager_sanction_issuances=issuances,
                attacks_in_game=attacks,
                sanctions_per_100_attacks=per100,
                score=score,
                rounds_skipped=rounds_skipped[pid],
                resilience_mean_rounds=resilience,
                censored_loss_count=censored,
                peer_sanctions_issued=peer_sanctions[pid],
                project_tasks_completed=tasks,
                score_per_task=score / tasks if tasks else None,
            )
        )
    return records


def with_participant(record: MetricsRecord, participant: str) -> MetricsRecord:
    return replace(record, participant=participant)


_COLUMNS = ["schema_version"] + [f.name for f in fields(MetricsRecord)]
_INT_FIELDS = {
    "immunity_loss_count",
    "immunity_repaired_before_deadline_count",
    "manager_sanction_issuances",
    "attacks_in_game",
    "score",
    "rounds_skipped",
    "censored_loss_count",
    "peer_sanctions_issued",
    "project_tasks_completed",
}
_FLOAT_FIELDS = {
    "compliance_rate",
    "sanctions_per_100_attacks",
    "resilience_mean_rounds",
    "score_per_task",
}


def write_metrics_csv(records: Sequence[MetricsRecord], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(_COLUMNS)
        for record in records:
            row = [SCHEMA_VERSION]
            for field_def in fields(MetricsRecord):
                value = getattr(record, field_def.name)
                row.append("" if value is None else repr(value) if isinstance(value, float) else str(value))
            writer.writerow(row)


def read_metrics_csv(path: str | Path) -> list[MetricsRecord]:
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise SchemaError(f"{path}: empty metrics file") from None
        if header != _COLUMNS:
            raise SchemaError(
                f"{path}: unexpected metrics schema; expected columns {_COLUMNS}, "
                f"found {header}"
            )
        records = []
        for row in reader:
            if not row:
                continue
            values = dict(zip(header, row))
            if values["schema_version"] != SCHEMA_VERSION:
                raise SchemaError(
                    f"{path}: schema version {values['schema_version']!r} is not "
                    f"{SCHEMA_VERSION!r}"
                )
            kwargs: dict = {}
            for field_def in fields(MetricsRecord):
                raw = values[field_def.name]
                if field_def.name in _INT_FIELDS:
                    kwargs[field_def.name] = int(raw)
                elif field_def.name in _FLOAT_FIELDS:
                    kwargs[field_def.name] = float(raw) if raw != "" else None
                else:
                    kwargs[field_def.name] = raw
            records.append(MetricsRecord(**kwargs))
        return records


@dataclass(frozen=True)
class ComparisonResult:
    metric: str
    label_a: str
    label_b: str
    n_pairs: int
    mean_a: float
    mean_b: float
    excluded: tuple[str, ...]
    test: TestResult

    def to_dict(self) -> dict:
        return {
            "metric": self.metric,
            "group_a": self.label_a,
            "group_b": self.label_b,
            "n_pairs": self.n_pairs,
            "mean_a": self.mean_a,
            "mean_b": self.mean_b,
            "excluded": list(self.excluded),
            **self.test.to_dict(),
        }


def _pair_key(record: MetricsRecord, pairing_key: str) -> str:
    value = getattr(record, pairing_key)
    if not value:
        raise PairingError(
            f"record for {record.player_id} in {record.game_id} has no "
            f"{pairing_key}; cannot pair"
        )
    return value


def _aggregate(
    records: Sequence[MetricsRecord], metric: str, pairing_key: str
) -> dict[str, float | None]:
    """Mean of present metric values per pairing key; None if all absent."""
    grouped: dict[str, list[float]] = {}
    seen: dict[str, bool] = {}
    for record in records:
        key = _pair_key(record, pairing_key)
        seen.setdefault(key, True)
        value = getattr(record, metric)
        if value is not None:
            grouped.setdefault(key, []).append(float(value))
    return {
        key: (sum(values) / len(values) if (values := grouped.get(key)) else None)
        for key in seen
    }


def compare(
    records_a: Sequence[MetricsRecord],
    records_b: Sequence[MetricsRecord],
    metric: str,
    pairing_key: str = "participant",
    label_a: str = "a",
    label_b: str = "b",
) -> ComparisonResult:
    """Paired comparison of one metric between two record sets.

    Records are aggregated per pairing key (mean over that member's games);
    keys present on only one side are a pairing error, keys whose metric is
    absent on either side are excluded and reported in the result.
    """
    if metric not in {f.name for f in fields(MetricsRecord)}:
        raise MetricsError(f"unknown metric {metric!r}")
    values_a = _aggregate(records_a, metric, pairing_key)
    values_b = _aggregate(records_b, metric, pairing_key)
    orphans = sorted(set(values_a) ^ set(values_b))
    if orphans:
        raise PairingError(
            f"keys present on only one side of the comparison: {orphans}"
        )
    keys = sorted(values_a)
    excluded = tuple(
        key for key in keys if values_a[key] is None or values_b[key] is None
    )
    paired_keys = [key for key in keys if key not in excluded]
    sample_a = [values_a[key] for key in paired_keys]
    sample_b = [values_b[key] for key in paired_keys]
    test = paired_comparison(sample_a, sample_b)
    return ComparisonResult(
        metric=metric,
        label_a=label_a,
        label_b=label_b,
        n_pairs=len(paired_keys),
        mean_a=sum(sample_a) / len(sample_a),
        mean_b=sum(sample_b) / len(sample_b),
        excluded=excluded,
        test=test,
    )
