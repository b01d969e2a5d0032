"""Batch runner: spec parsing, seed derivation, outputs, and reproducibility."""

import json

import pytest

from normgame import events as ev
from normgame.events import read_event_log
from normgame.experiment import (
    COMPARISON_METRICS,
    DEFAULT_SCHEDULE,
    ExperimentError,
    ExperimentSpec,
    build_report,
    derive_seed,
    first_vs_second_deltas,
    participant_label,
    render_report,
    replay_log_file,
    run_experiment,
    summarize,
)
from normgame.metrics import MetricsRecord, read_metrics_csv
from normgame.policies import PolicySpec


def _small_spec(**overrides) -> ExperimentSpec:
    base = dict(
        name="trial",
        cohort_size=4,
        group_size=2,
        base_seed=2024,
        game_config={"rounds": 8},
    )
    base.update(overrides)
    return ExperimentSpec(**base)


@pytest.mark.parametrize(
    "overrides",
    [
        {"name": ""},
        {"group_size": 1},
        {"group_size": 6, "cohort_size": 6},
        {"cohort_size": 5},
        {"cohort_size": 0},
        {"games_per_participant": ("individual", "solo")},
        {"policy_overrides": {9: PolicySpec("random")}},
        {"policy_overrides": {-1: PolicySpec("random")}},
        {"risk_scores": (0.1, 0.2)},
        {"default_policy": PolicySpec("compliant-first", theta=2.0)},
    ],
)
def test_spec_validation_rejects(overrides):
    with pytest.raises((ExperimentError, ValueError)):
        _small_spec(**overrides).validate()


def test_spec_from_dict_parses_policies_and_defaults():
    spec = ExperimentSpec.from_dict(
        {
            "name": "pilot",
            "cohort_size": 6,
            "group_size": 3,
            "base_seed": 7,
            "policies": {
                "default": {"kind": "risk-weighted", "theta": 0.4, "enforce": 0.2},
                "2": {"kind": "always-skip"},
            },
            "risk_scores": [1, 2, 3, 4, 5, 6],
            "games_per_participant": ["group", "individual"],
        }
    )
    assert spec.default_policy == PolicySpec("risk-weighted", theta=0.4, enforce=0.2)
    assert spec.policy_overrides == {2: PolicySpec("always-skip")}
    assert spec.policy_for(2).kind == "always-skip"
    assert spec.policy_for(0).kind == "risk-weighted"
    assert spec.risk_score_for(4) == 5.0
    assert spec.games_per_participant == ("group", "individual")
    assert spec.shuffle_regime_order is False


def test_spec_from_dict_defaults():
    spec = ExperimentSpec.from_dict(
        {"name": "bare", "cohort_size": 2, "group_size": 2, "base_seed": 1}
    )
    assert spec.games_per_participant == DEFAULT_SCHEDULE
    assert spec.default_policy.kind == "compliant-first"
    assert spec.risk_scores is None
    assert spec.risk_score_for(0) == 0.0


def test_spec_from_file(tmp_path):
    path = tmp_path / "exp.json"
    path.write_text(
        json.dumps(
            {"name": "filed", "cohort_size": 2, "group_size": 2, "base_seed": 11}
        )
    )
    assert ExperimentSpec.from_file(path).name == "filed"

    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    with pytest.raises(ExperimentError):
        ExperimentSpec.from_file(bad)
    with pytest.raises(ExperimentError):
        ExperimentSpec.from_file(tmp_path / "missing.json")


def test_derive_seed_is_stable_and_sensitive():
    assert derive_seed(1, 2, 3) == derive_seed(1, 2, 3)
    seeds = {
        derive_seed(1, 2, 3),
        derive_seed(2, 2, 3),
        derive_seed(1, 3, 3),
        derive_seed(1, 2, 4),
    }
    assert len(seeds) == 4
    for seed in seeds:
        assert 0 <= seed < 2**64


def test_participant_labels():
    assert participant_label(0) == "P000"
    assert participant_label(42) == "P042"
    assert participant_label(999) == "P999"


def test_run_experiment_produces_full_output_tree(tmp_path):
    result = run_experiment(_small_spec(), tmp_path)

    # 2 groups x 4 scheduled games
    assert len(result.log_paths) == 8
    assert sorted(result.log_paths) == sorted((tmp_path / "logs").glob("*.jsonl"))
    names = {p.name for p in result.log_paths}
    assert "trial_grp0_game0_individual.jsonl" in names
    assert "trial_grp1_game3_group.jsonl" in names

    # 8 games x 2 seats
    assert len(result.records) == 16
    assert {r.participant for r in result.records} == {"P000", "P001", "P002", "P003"}
    assert result.metrics_path == tmp_path / "metrics.csv"
    assert read_metrics_csv(result.metrics_path) == result.records
    assert json.loads(result.report_path.read_text()) == result.report
    assert (tmp_path / "report.txt").exists()


def test_run_experiment_seeds_follow_derivation(tmp_path):
    spec = _small_spec()
    run_experiment(spec, tmp_path)
    for group_index, game_index in ((0, 0), (1, 2)):
        regime = spec.games_per_participant[game_index]
        name = f"trial_grp{group_index}_game{game_index}_{regime}.jsonl"
        log = read_event_log(tmp_path / "logs" / name)
        config = log[0].payload["config"]
        anchor = group_index * spec.group_size
        assert config["seed"] == derive_seed(spec.base_seed, anchor, game_index)
        assert config["regime"] == regime
        assert config["rounds"] == 8
        assert config["player_count"] == 2


def test_run_experiment_is_byte_deterministic(tmp_path):
    spec = _small_spec()
    run_experiment(spec, tmp_path / "a")
    run_experiment(spec, tmp_path / "b")
    files_a = sorted(p for p in (tmp_path / "a").rglob("*") if p.is_file())
    files_b = sorted(p for p in (tmp_path / "b").rglob("*") if p.is_file())
    assert [p.name for p in files_a] == [p.name for p in files_b]
    for left, right in zip(files_a, files_b):
        assert left.read_bytes() == right.read_bytes(), left.name


def test_shuffled_schedule_is_a_deterministic_permutation(tmp_path):
    spec = _small_spec(shuffle_regime_order=True)
    result = run_experiment(spec, tmp_path / "a")
    orders = {}
    for path in result.log_paths:
        stem = path.stem  # trial_grpG_gameJ_regime
        _, grp, game, regime = stem.split("_")
        orders.setdefault(grp, {})[int(game.removeprefix("game"))] = regime
    for grp, by_index in orders.items():
        sequence = [by_index[i] for i in sorted(by_index)]
        assert sorted(sequence) == sorted(DEFAULT_SCHEDULE), grp

    rerun = run_experiment(spec, tmp_path / "b")
    assert [p.name for p in rerun.log_paths] == [p.name for p in result.log_paths]


def test_policy_overrides_reach_the_right_seat(tmp_path):
    spec = _small_spec(policy_overrides={1: PolicySpec("always-skip")})
    run_experiment(spec, tmp_path)
    log = read_event_log(tmp_path / "logs" / "trial_grp0_game0_individual.jsonl")
    submitted = [
        e.payload for e in log if e.kind == ev.ACTION_SUBMITTED
    ]
    p1_kinds = {p["action"]["kind"] for p in submitted if p["player_id"] == "p1"}
    assert p1_kinds == {"skip"}
    # participant 3 sits in group 1 and keeps the default policy
    other = read_event_log(tmp_path / "logs" / "trial_grp1_game0_individual.jsonl")
    other_kinds = {
        e.payload["action"]["kind"]
        for e in other
        if e.kind == ev.ACTION_SUBMITTED and e.payload["player_id"] == "p1"
    }
    assert other_kinds != {"skip"}


def test_experiment_logs_replay_cleanly(tmp_path):
    result = run_experiment(_small_spec(), tmp_path)
    state = replay_log_file(result.log_paths[0])
    assert state.game_id == result.log_paths[0].stem
    assert state.round == 8


def test_report_covers_all_comparison_metrics(tmp_path):
    result = run_experiment(_small_spec(), tmp_path)
    report = result.report
    assert report["n_records"] == 16
    assert report["n_participants"] == 4
    assert set(report["comparisons"]) == set(COMPARISON_METRICS)
    for metric, entry in report["comparisons"].items():
        if "error" in entry:
            continue
        assert entry["group_a"] == "individual"
        assert entry["group_b"] == "group"
        assert entry["n_pairs"] >= 2
        assert "p_two_tailed" in entry and "hedges_g" in entry

    # default schedule has two games per regime, so deltas exist
    fvs = report["first_vs_second"]
    assert "note" not in fvs
    assert fvs["metric"] == "immunity_repaired_before_deadline_count"
    assert fvs["n_pairs"] == 4


def test_first_vs_second_requires_two_games_per_regime(tmp_path):
    spec = _small_spec(games_per_participant=("individual", "group"))
    result = run_experiment(spec, tmp_path)
    assert "note" in result.report["first_vs_second"]


def _record(participant, regime, repaired, game_id):
    return MetricsRecord(
        game_id=game_id,
        player_id="p0",
        participant=participant,
        regime=regime,
        immunity_loss_count=repaired,
        immunity_repaired_before_deadline_count=repaired,
        compliance_rate=None,
        manager_sanction_issuances=0,
        attacks_in_game=0,
        sanctions_per_100_attacks=None,
        score=10 if regime == "individual" else 5,
        rounds_skipped=0,
        resilience_mean_rounds=None,
        censored_loss_count=0,
        peer_sanctions_issued=0,
        project_tasks_completed=0,
        score_per_task=None,
    )


def test_first_vs_second_deltas_direct():
    records = [
        _record("P000", "individual", 1, "g0"),
        _record("P000", "individual", 3, "g1"),
        _record("P000", "group", 2, "g2"),
        _record("P000", "group", 2, "g3"),
        _record("P001", "individual", 0, "g0"),
        _record("P001", "individual", 1, "g1"),
        _record("P001", "group", 1, "g2"),
        _record("P001", "group", 1, "g3"),
    ]
    fvs = first_vs_second_deltas(records)
    assert fvs["mean_delta_individual"] == 1.5
    assert fvs["mean_delta_group"] == 0.0
    assert fvs["n_pairs"] == 2
    assert "t_statistic" in fvs


def test_render_report_lists_each_metric(tmp_path):
    result = run_experiment(_small_spec(), tmp_path)
    text = render_report(result.report)
    assert text == (tmp_path / "report.txt").read_text()
    for metric in COMPARISON_METRICS:
        assert metric in text
    assert "participants: 4" in text


def test_summarize_rebuilds_report_from_csv(tmp_path):
    result = run_experiment(_small_spec(), tmp_path)
    records, report = summarize(tmp_path)
    assert records == result.records
    assert report == result.report


def test_summarize_merges_multiple_csvs(tmp_path):
    spec_a = _small_spec()
    spec_b = _small_spec(name="round2", base_seed=99)
    result_a = run_experiment(spec_a, tmp_path / "a")
    result_b = run_experiment(spec_b, tmp_path / "b")
    records, report = summarize(tmp_path)
    assert len(records) == len(result_a.records) + len(result_b.records)
    assert report["n_records"] == 32


def test_summarize_without_csvs_raises(tmp_path):
    with pytest.raises(ExperimentError):
        summarize(tmp_path)


def test_build_report_carries_errors_instead_of_numbers():
    # constant score gap means zero variance in the diffs, and an all-absent
    # metric leaves nothing to pair; both surface as error entries
    records = [
        _record("P000", "individual", 0, "g0"),
        _record("P000", "group", 0, "g1"),
        _record("P001", "individual", 0, "g0"),
        _record("P001", "group", 0, "g1"),
    ]
    report = build_report(records)
    assert "error" in report["comparisons"]["score"]
    assert "error" in report["comparisons"]["compliance_rate"]
    assert "note" in report["first_vs_second"]
    text = render_report(report)
    assert "--" in text
