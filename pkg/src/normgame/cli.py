"""Command line entry points.

simulate  run an experiment batch from a JSON file
analyze   merge metrics CSVs and print/re-emit the comparison report
replay    rebuild the final state of one game log and print a summary
serve     start the multiplayer room server
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .engine import Phase
from .events import CorruptLogError
from .experiment import (
    COMPARISON_METRICS,
    ExperimentError,
    ExperimentSpec,
    build_report,
    render_report,
    replay_log_file,
    run_experiment,
    summarize,
)
from .metrics import SchemaError
from .model import COLOR_ORDER, ConfigError, compliance_status


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="normgame",
        description="Deterministic norm-compliance game: batches, analysis, replay, server",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    simulate = sub.add_parser("simulate", help="run an experiment batch")
    simulate.add_argument("--spec", required=True, help="experiment JSON file")
    simulate.add_argument("--out", help="output directory (overrides the spec)")

    analyze = sub.add_parser("analyze", help="summarize metrics CSV files")
    analyze.add_argument("--in", dest="input_dir", required=True, help="directory with metrics CSVs")
    analyze.add_argument(
        "--compare",
        default="individual:group",
        help="comparison axis; only individual:group is supported",
    )
    analyze.add_argument(
        "--metric",
        action="append",
        help="metric to compare (repeatable; default: the standard set)",
    )
    analyze.add_argument("--json", help="also write the report as JSON to this path")

    rep = sub.add_parser("replay", help="replay one game log")
    rep.add_argument("--log", required=True, help="event log (JSON lines)")

    serve = sub.add_parser("serve", help="start the room server")
    serve.add_argument("--bind", default="127.0.0.1:8765", help="host:port to listen on")
    serve.add_argument("--storage", required=True, help="directory for room logs")
    serve.add_argument(
        "--timeout", type=float, default=30.0, help="per-round action timeout in seconds"
    )
    serve.add_argument(
        "--room",
        action="append",
        default=[],
        help="bootstrap a room from a config JSON file (repeatable)",
    )
    return parser


def _cmd_simulate(args: argparse.Namespace) -> int:
    spec = ExperimentSpec.from_file(args.spec)
    result = run_experiment(spec, output_dir=args.out)
    print(f"simulated {len(result.log_paths)} games for {spec.cohort_size} participants")
    print(f"logs:    {result.log_paths[0].parent}")
    print(f"metrics: {result.metrics_path}")
    print(f"report:  {result.report_path}")
    print()
    print(render_report(result.report), end="")
    return 0


def _cmd_analyze(args: argparse.Namespace) -> int:
    if args.compare != "individual:group":
        raise ExperimentError(
            f"unsupported comparison {args.compare!r}; only individual:group exists"
        )
    metrics = tuple(args.metric) if args.metric else COMPARISON_METRICS
    records, report = summarize(args.input_dir, metrics)
    print(render_report(report), end="")
    if args.json:
        Path(args.json).write_text(
            json.dumps(report, indent=2, sort_keys=True) + "\n", encoding="utf-8"
        )
        print(f"report written to {args.json}")
    return 0


def _cmd_replay(args: argparse.Namespace) -> int:
    state = replay_log_file(args.log)
    print(f"game:    {state.game_id}")
    print(f"phase:   {state.phase.value}")
    print(f"round:   {state.round} of {state.config.rounds}")
    print(f"regime:  {state.config.regime.value}")
    print(f"attacks: {state.attack_count}   sanction issuances: {state.manager_sanction_issuances}")
    for player in state.players:
        held = "".join(
            color.value[0] if player.slots[color].held else "-" for color in COLOR_ORDER
        )
        compliant = "compliant" if compliance_status(player, state.round) else "NONCOMPLIANT"
        sanction = player.sanction.kind.value
        print(
            f"  {player.player_id}: score {player.score:>4}  immunities [{held}]  "
            f"{compliant}  sanction {sanction}"
        )
    if state.phase is not Phase.FINISHED:
        print("note: log ends before game over; state is as of the last event")
    return 0


def _cmd_serve(args: argparse.Namespace) -> int:
    from .server import serve  # deferred: pulls in fastapi/uvicorn

    host, _, port = args.bind.rpartition(":")
    if not host or not port.isdigit():
        raise ConfigError(f"--bind must be host:port, got {args.bind!r}")
    serve(
        host=host,
        port=int(port),
        storage_dir=args.storage,
        round_timeout=args.timeout,
        room_files=args.room,
    )
    return 0


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    handlers = {
        "simulate": _cmd_simulate,
        "analyze": _cmd_analyze,
        "replay": _cmd_replay,
        "serve": _cmd_serve,
    }
    try:
        return handlers[args.command](args)
    except (
        ExperimentError,
        ConfigError,
        CorruptLogError,
        SchemaError,
        FileNotFoundError,
    ) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
