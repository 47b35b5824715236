"""Command line entry points: serve, play, batch, export-pddl, scenario check."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .agents import AGENTS
from .config import DungeonConfig, load_config
from .engine import observe
from .errors import RunecrawlError, ScenarioParseError
from .gateway.server import ServerConfig, run_server
from .harness import run_batch, run_episode
from .pddl import PddlGoal, export_domain, export_problem
from .scenario import (
    BUILTIN_SCENARIOS,
    instantiate_scenario,
    parse_scenario,
    render_scenario,
)


def _load_scenario_arg(value: str):
    path = Path(value)
    if path.is_file():
        return parse_scenario(path.read_text(encoding="utf-8"))
    if value in BUILTIN_SCENARIOS:
        return parse_scenario(BUILTIN_SCENARIOS[value])
    raise RunecrawlError(f"no scenario file or built-in named {value!r}")


def _setup_from_args(args):
    if getattr(args, "scenario", None):
        return _load_scenario_arg(args.scenario)
    if getattr(args, "config", None):
        return load_config(args.config)
    return DungeonConfig()


def _add_episode_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--scenario", help="scenario file path or built-in name")
    parser.add_argument("--config", help="dungeon config file")
    parser.add_argument("--agent", choices=sorted(AGENTS), default="random")
    parser.add_argument("--turn-limit", type=int, default=None)
    parser.add_argument("--remote", help="gateway address host:port")
    parser.add_argument("--out", help="directory for episode logs")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="runecrawl")
    sub = parser.add_subparsers(dest="command", required=True)

    serve = sub.add_parser("serve", help="run the agent gateway")
    serve.add_argument("--bind", default="127.0.0.1:7777", help="host:port")
    serve.add_argument("--max-sessions", type=int, default=256)
    serve.add_argument("--scenario-dir")
    serve.add_argument("--log-dir")

    play = sub.add_parser("play", help="run one episode")
    _add_episode_args(play)

    batch = sub.add_parser("batch", help="run a batch of episodes")
    _add_episode_args(batch)
    batch.add_argument("--episodes", type=int, default=10)
    batch.add_argument("--parallel", type=int, default=1)

    export = sub.add_parser("export-pddl", help="write domain and problem files")
    export.add_argument("--seed", type=int, default=0)
    export.add_argument("--scenario", required=True)
    export.add_argument("--goal", default="has_orb",
                        help="has_orb | has_runes:<n> | at:<row>,<col> | holding:<iid>")
    export.add_argument("--out", default=".")

    scen = sub.add_parser("scenario", help="scenario tools")
    scen_sub = scen.add_subparsers(dest="scenario_command", required=True)
    check = scen_sub.add_parser("check", help="validate a scenario file")
    check.add_argument("file")
    return parser


def _parse_goal(text: str) -> PddlGoal:
    from .worldgen import Position
    if text == "has_orb":
        return PddlGoal.has_orb()
    if text.startswith("has_runes:"):
        return PddlGoal.has_runes(int(text.split(":", 1)[1]))
    if text.startswith("at:"):
        row, col = text.split(":", 1)[1].split(",")
        return PddlGoal.at(Position(int(row), int(col)))
    if text.startswith("holding:"):
        return PddlGoal.holding(text.split(":", 1)[1])
    raise RunecrawlError(f"cannot parse goal {text!r}")


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _dispatch(args)
    except ScenarioParseError as exc:
        print(f"scenario error: {exc}", file=sys.stderr)
        return 2
    except RunecrawlError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def _dispatch(args) -> int:
    if args.command == "serve":
        host, _, port = args.bind.rpartition(":")
        run_server(ServerConfig(
            bind=host or "127.0.0.1", port=int(port),
            max_sessions=args.max_sessions,
            scenario_dir=args.scenario_dir, log_dir=args.log_dir,
        ))
        return 0

    if args.command == "play":
        setup = _setup_from_args(args)
        result = run_episode(args.agent, setup, args.seed,
                             turn_limit=args.turn_limit,
                             out_dir=args.out, remote=args.remote)
        print(json.dumps(result.report.to_dict(), sort_keys=True, indent=2))
        if result.log_path:
            print(f"episode log: {result.log_path}")
        return 0

    if args.command == "batch":
        setup = _setup_from_args(args)
        report, results = run_batch(
            args.agent, setup, episodes=args.episodes, seed0=args.seed,
            turn_limit=args.turn_limit, parallel=args.parallel,
            out_dir=args.out, remote=args.remote)
        print(report.to_table())
        logged = [r.log_path for r in results if r.log_path]
        if logged:
            print(f"episode logs: {len(logged)} files in {Path(logged[0]).parent}")
        return 0

    if args.command == "export-pddl":
        spec = _load_scenario_arg(args.scenario)
        game = instantiate_scenario(spec, args.seed)
        obs = observe(game)
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / "domain.pddl").write_text(export_domain(), encoding="utf-8")
        problem = export_problem(obs, _parse_goal(args.goal), name=spec.name)
        problem_path = out / f"problem_{int(obs.turn_count)}.pddl"
        problem_path.write_text(problem, encoding="utf-8")
        print(f"wrote {out / 'domain.pddl'} and {problem_path}")
        return 0

    if args.command == "scenario" and args.scenario_command == "check":
        text = Path(args.file).read_text(encoding="utf-8")
        spec = parse_scenario(text)
        canon = render_scenario(spec)
        round_trip = parse_scenario(canon)
        status = "ok" if round_trip == spec else "ok (non-canonical formatting)"
        print(f"{args.file}: {status}: {spec.rows}x{spec.cols}, win={spec.win}, "
              f"legend={len(spec.legend)} entries")
        return 0

    return 2


if __name__ == "__main__":
    sys.exit(main())
