"""Batch experiment runner: a cohort plays scheduled games, metrics and
comparison reports come out.

A cohort is split into groups by participant index; each group plays the
scheduled regime sequence together, so a participant's games are their
group's games and their seat stays fixed.  Every game seed is derived by a
stable hash from (base seed, group anchor participant, game index), which
makes the whole batch reproducible byte for byte: logs, the metrics CSV,
and the report files.
"""

from __future__ import annotations

import hashlib
import json
import random
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

from .engine import replay
from .events import read_event_log, write_event_log
from .metrics import (
    ComparisonResult,
    MetricsRecord,
    compare,
    compute_metrics,
    read_metrics_csv,
    with_participant,
    write_metrics_csv,
)
from .model import GameConfig, Regime
from .policies import PolicySpec, run_bot_game
from .stats import StatsError, paired_comparison


class ExperimentError(ValueError):
    pass


DEFAULT_SCHEDULE = ("individual", "individual", "group", "group")

COMPARISON_METRICS = (
    "compliance_rate",
    "sanctions_per_100_attacks",
    "score",
    "rounds_skipped",
    "resilience_mean_rounds",
)


@dataclass(frozen=True)
class ExperimentSpec:
    name: str
    cohort_size: int
    group_size: int
    base_seed: int
    output_dir: str = "results"
    games_per_participant: tuple[str, ...] = DEFAULT_SCHEDULE
    shuffle_regime_order: bool = False
    default_policy: PolicySpec = field(
        default_factory=lambda: PolicySpec("compliant-first")
    )
    policy_overrides: dict[int, PolicySpec] = field(default_factory=dict)
    risk_scores: tuple[float, ...] | None = None
    game_config: dict = field(default_factory=dict)

    def validate(self) -> None:
        if not self.name:
            raise ExperimentError("experiment name must not be empty")
        if not 2 <= self.group_size <= 5:
            raise ExperimentError(
                f"group_size must be between 2 and 5, got {self.group_size}"
            )
        if self.cohort_size < self.group_size or self.cohort_size % self.group_size:
            raise ExperimentError(
                f"cohort_size {self.cohort_size} must be a positive multiple of "
                f"group_size {self.group_size}"
            )
        for regime in self.games_per_participant:
            if regime not in ("individual", "group"):
                raise ExperimentError(f"unknown regime {regime!r} in schedule")
        for index in self.policy_overrides:
            if not 0 <= index < self.cohort_size:
                raise ExperimentError(f"policy override for unknown participant {index}")
        if self.risk_scores is not None and len(self.risk_scores) != self.cohort_size:
            raise ExperimentError(
                f"risk_scores must have cohort_size={self.cohort_size} entries, "
                f"got {len(self.risk_scores)}"
            )
        self.default_policy.validate()
        for spec in self.policy_overrides.values():
            spec.validate()

    def policy_for(self, participant: int) -> PolicySpec:
        return self.policy_overrides.get(participant, self.default_policy)

    def risk_score_for(self, participant: int) -> float:
        if self.risk_scores is None:
            return 0.0
        return self.risk_scores[participant]

    @classmethod
    def from_dict(cls, data: dict) -> ExperimentSpec:
        policies = data.get("policies", {})
        default = PolicySpec.from_dict(policies.get("default", {"kind": "compliant-first"}))
        overrides = {
            int(key): PolicySpec.from_dict(value)
            for key, value in policies.items()
            if key != "default"
        }
        spec = cls(
            name=data["name"],
            cohort_size=int(data["cohort_size"]),
            group_size=int(data["group_size"]),
            base_seed=int(data["base_seed"]),
            output_dir=data.get("output_dir", "results"),
            games_per_participant=tuple(
                data.get("games_per_participant", DEFAULT_SCHEDULE)
            ),
            shuffle_regime_order=bool(data.get("shuffle_regime_order", False)),
            default_policy=default,
            policy_overrides=overrides,
            risk_scores=tuple(data["risk_scores"]) if "risk_scores" in data else None,
            game_config=dict(data.get("game_config", {})),
        )
        spec.validate()
        return spec

    @classmethod
    def from_file(cls, path: str | Path) -> ExperimentSpec:
        try:
            data = json.loads(Path(path).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise ExperimentError(f"cannot read experiment file {path}: {exc}") from exc
        return cls.from_dict(data)


def derive_seed(base_seed: int, participant: int, game_index: int) -> int:
    """Stable integer hash; independent of process hash randomization."""
    text = f"{base_seed}:{participant}:{game_index}"
    return int.from_bytes(hashlib.sha256(text.encode("utf-8")).digest()[:8], "big")


def _group_schedule(spec: ExperimentSpec, group_index: int) -> list[str]:
    order = list(spec.games_per_participant)
    if spec.shuffle_regime_order:
        shuffle_rng = random.Random(derive_seed(spec.base_seed, group_index, -1))
        shuffle_rng.shuffle(order)
    return order


def participant_label(index: int) -> str:
    return f"P{index:03d}"


@dataclass
class ExperimentResult:
    spec: ExperimentSpec
    records: list[MetricsRecord]
    report: dict
    log_paths: list[Path]
    metrics_path: Path
    report_path: Path


def run_experiment(spec: ExperimentSpec, output_dir: str | Path | None = None) -> ExperimentResult:
    spec.validate()
    out = Path(output_dir if output_dir is not None else spec.output_dir)
    logs_dir = out / "logs"
    logs_dir.mkdir(parents=True, exist_ok=True)

    all_records: list[MetricsRecord] = []
    log_paths: list[Path] = []
    group_count = spec.cohort_size // spec.group_size
    for group_index in range(group_count):
        anchor = group_index * spec.group_size
        participants = list(range(anchor, anchor + spec.group_size))
        schedule = _group_schedule(spec, group_index)
        for game_index, regime in enumerate(schedule):
            config = GameConfig.from_dict(
                {
                    **spec.game_config,
                    "regime": regime,
                    "player_count": spec.group_size,
                    "seed": derive_seed(spec.base_seed, anchor, game_index),
                }
            )
            game_id = f"{spec.name}_grp{group_index}_game{game_index}_{regime}"
            policies = [spec.policy_for(p) for p in participants]
            risk = [spec.risk_score_for(p) for p in participants]
            state, log = run_bot_game(
                config, policies, game_id=game_id, risk_scores=risk
            )
            path = logs_dir / f"{game_id}.jsonl"
            write_event_log(path, log)
            log_paths.append(path)
            for seat, record in enumerate(compute_metrics(log)):
                all_records.append(
                    with_participant(record, participant_label(participants[seat]))
                )

    metrics_path = out / "metrics.csv"
    write_metrics_csv(all_records, metrics_path)
    report = build_report(all_records)
    report_path = out / "report.json"
    report_path.write_text(
        json.dumps(report, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
    (out / "report.txt").write_text(render_report(report), encoding="utf-8")
    return ExperimentResult(
        spec=spec,
        records=all_records,
        report=report,
        log_paths=log_paths,
        metrics_path=metrics_path,
        report_path=report_path,
    )


def _split_by_regime(
    records: Sequence[MetricsRecord],
) -> tuple[list[MetricsRecord], list[MetricsRecord]]:
    individual = [r for r in records if r.regime == Regime.INDIVIDUAL.value]
    group = [r for r in records if r.regime == Regime.GROUP.value]
    return individual, group


def build_report(
    records: Sequence[MetricsRecord],
    metrics: Sequence[str] = COMPARISON_METRICS,
) -> dict:
    """Regime contrast per metric, plus first-vs-second game deltas."""
    individual, group = _split_by_regime(records)
    comparisons: dict[str, dict] = {}
    for metric in metrics:
        try:
            result = compare(
                individual,
                group,
                metric,
                pairing_key="participant",
                label_a="individual",
                label_b="group",
            )
            comparisons[metric] = result.to_dict()
        except StatsError as exc:
            comparisons[metric] = {"error": str(exc)}
    report = {
        "n_records": len(records),
        "n_participants": len({r.participant for r in records}),
        "comparisons": comparisons,
        "first_vs_second": first_vs_second_deltas(records),
    }
    return report


def first_vs_second_deltas(records: Sequence[MetricsRecord]) -> dict:
    """Within-regime learning effect: second game minus first, per player.

    Uses the count of immunities repaired before their deadline.  Returns
    the per-regime mean deltas and the paired contrast between regimes, or
    a note when the schedule does not have two games per regime.
    """
    by_participant: dict[str, dict[str, list[MetricsRecord]]] = {}
    for record in records:
        slot = by_participant.setdefault(record.participant, {"individual": [], "group": []})
        slot[record.regime].append(record)
    deltas_individual: list[float] = []
    deltas_group: list[float] = []
    for participant in sorted(by_participant):
        slots = by_participant[participant]
        if len(slots["individual"]) < 2 or len(slots["group"]) < 2:
            return {
                "note": "schedule does not include two games per regime; "
                "no first-vs-second contrast"
            }
        for regime, sink in (("individual", deltas_individual), ("group", deltas_group)):
            first, second = slots[regime][0], slots[regime][1]
            sink.append(
                float(
                    second.immunity_repaired_before_deadline_count
                    - first.immunity_repaired_before_deadline_count
                )
            )
    result: dict = {
        "metric": "immunity_repaired_before_deadline_count",
        "mean_delta_individual": sum(deltas_individual) / len(deltas_individual),
        "mean_delta_group": sum(deltas_group) / len(deltas_group),
        "n_pairs": len(deltas_individual),
    }
    try:
        test = paired_comparison(deltas_individual, deltas_group)
        result.update(test.to_dict())
    except StatsError as exc:
        result["error"] = str(exc)
    return result


def render_report(report: dict) -> str:
    """Plain-text table for terminals; content mirrors the JSON report."""
    lines = [
        f"records: {report['n_records']}   participants: {report['n_participants']}",
        "",
        f"{'metric':<28}{'n':>4}{'mean ind':>12}{'mean grp':>12}"
        f"{'t':>10}{'df':>5}{'p':>10}{'g':>8}  effect",
    ]
    for metric, entry in report["comparisons"].items():
        if "error" in entry:
            lines.append(f"{metric:<28}  -- {entry['error']}")
            continue
        lines.append(
            f"{metric:<28}{entry['n_pairs']:>4}{entry['mean_a']:>12.4f}"
            f"{entry['mean_b']:>12.4f}{entry['t_statistic']:>10.4f}"
            f"{entry['degrees_of_freedom']:>5}{entry['p_two_tailed']:>10.4f}"
            f"{entry['hedges_g']:>8.3f}  {entry['effect_label']}"
        )
        if entry["excluded"]:
            lines.append(f"{'':<28}  excluded: {', '.join(entry['excluded'])}")
    fvs = report["first_vs_second"]
    lines.append("")
    if "note" in fvs:
        lines.append(f"first vs second game: {fvs['note']}")
    else:
        lines.append(
            "first vs second game (repairs before deadline, second minus first):"
        )
        lines.append(
            f"  individual {fvs['mean_delta_individual']:+.4f}   "
            f"group {fvs['mean_delta_group']:+.4f}   n={fvs['n_pairs']}"
        )
        if "t_statistic" in fvs:
            lines.append(
                f"  contrast: t={fvs['t_statistic']:.4f} df={fvs['degrees_of_freedom']}"
                f" p={fvs['p_two_tailed']:.4f} g={fvs['hedges_g']:.3f}"
                f" ({fvs['effect_label']})"
            )
        elif "error" in fvs:
            lines.append(f"  contrast unavailable: {fvs['error']}")
    return "\n".join(lines) + "\n"


def summarize(
    input_dir: str | Path,
    metrics: Sequence[str] = COMPARISON_METRICS,
) -> tuple[list[MetricsRecord], dict]:
    """Merge every metrics CSV under a directory and rebuild the report."""
    paths = sorted(Path(input_dir).glob("**/*.csv"))
    if not paths:
        raise ExperimentError(f"no metrics CSV files under {input_dir}")
    records: list[MetricsRecord] = []
    for path in paths:
        records.extend(read_metrics_csv(path))
    return records, build_report(records, metrics)


def replay_log_file(path: str | Path):
    """Replay one log file to its final state (CLI helper)."""
    return replay(read_event_log(path))
