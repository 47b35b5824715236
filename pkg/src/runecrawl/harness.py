"""Episode drivers: run a policy against the engine directly or through the
gateway, seal the history, and fold it into metrics. Batches fan episodes out
over consecutive seeds, optionally in parallel, without losing per-episode
determinism (each episode owns its rng streams and game state)."""

from __future__ import annotations

import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Union

from .agents import AGENTS, AgentFn
from .catalog import Catalog, default_catalog
from .config import DungeonConfig
from .engine import GameStatus, new_game, observe, step
from .errors import MacroError, RunecrawlError
from .macros import expand_macro, macro_interrupted
from .metrics import AggregateReport, EpisodeHistory, MetricsReport, aggregate, episode_metrics
from .rng import stream_for
from .scenario import ScenarioSpec, instantiate_scenario

DEFAULT_TURN_LIMIT = 1000


@dataclass
class EpisodeResult:
    report: MetricsReport
    history: Optional[EpisodeHistory]
    log_hash: str
    log_path: Optional[str] = None


def _resolve_agent(agent: Union[str, AgentFn]) -> tuple[str, AgentFn]:
    if callable(agent):
        return getattr(agent, "__name__", "custom"), agent
    if agent not in AGENTS:
        raise RunecrawlError(f"unknown agent {agent!r}; have {sorted(AGENTS)}")
    return agent, AGENTS[agent]


def _resolve_limit(setup, turn_limit: Optional[int]) -> int:
    if turn_limit is not None:
        return turn_limit
    if isinstance(setup, ScenarioSpec) and setup.turn_limit is not None:
        return setup.turn_limit
    return DEFAULT_TURN_LIMIT


def run_episode(
    agent: Union[str, AgentFn],
    setup: Union[ScenarioSpec, DungeonConfig, None],
    seed: int,
    turn_limit: Optional[int] = None,
    catalog: Optional[Catalog] = None,
    out_dir: Optional[str] = None,
    remote: Optional[str] = None,
) -> EpisodeResult:
    """Play one episode to its end (win, death, or turn limit)."""
    limit = _resolve_limit(setup, turn_limit)
    if remote is not None:
        return _run_episode_remote(agent, setup, seed, limit, remote)

    name, policy = _resolve_agent(agent)
    catalog = catalog or default_catalog()
    if isinstance(setup, ScenarioSpec):
        game = instantiate_scenario(setup, seed, catalog, agent_name=name)
    else:
        game = new_game(seed, setup, catalog, agent_name=name)
    game.turn_limit = limit

    rng = stream_for(seed, "agent", name)
    memory: dict = {}
    observation = observe(game)
    started = time.perf_counter()

    while game.status == GameStatus.RUNNING and game.turn_count < limit:
        action, memory = policy(observation, memory, rng)
        if action.is_macro:
            primitives = expand_macro(action, observation)   # MacroError propagates
            before = observation
            for primitive in primitives:
                result = step(game, primitive)
                observation = result.observation
                refused = any(e.get("type") == "refused" for e in result.events)
                if (refused or result.status != GameStatus.RUNNING
                        or macro_interrupted(before, observation)
                        or game.turn_count >= limit):
                    break
                before = observation
        else:
            result = step(game, action)
            observation = result.observation

    outcome = {GameStatus.WON: "won", GameStatus.DEAD: "dead"}.get(
        game.status, "truncated")
    game.history.seal(outcome, time.perf_counter() - started)
    report = episode_metrics(game.history)

    log_path = None
    if out_dir is not None:
        directory = Path(out_dir)
        directory.mkdir(parents=True, exist_ok=True)
        log_path = directory / f"episode_{name}_{seed}.jsonl"
        log_path.write_text(game.history.to_jsonl(), encoding="utf-8")
    return EpisodeResult(
        report=report, history=game.history,
        log_hash=game.history.content_hash(),
        log_path=str(log_path) if log_path else None,
    )


def _run_episode_remote(agent, setup, seed, turn_limit, remote: str) -> EpisodeResult:
    from .config import render_config
    from .gateway.client import GatewayClient
    from .scenario import render_scenario

    name, policy = _resolve_agent(agent)
    host, _, port = remote.rpartition(":")
    with GatewayClient(host or "127.0.0.1", int(port)) as client:
        kwargs: dict = {}
        if isinstance(setup, ScenarioSpec):
            kwargs["scenario_text"] = render_scenario(setup)
        elif isinstance(setup, DungeonConfig):
            kwargs["config_text"] = render_config(setup)
        observation = client.hello_agent(
            seed=seed, agent=name, turn_limit=turn_limit, **kwargs)

        rng = stream_for(seed, "agent", name)
        memory: dict = {}
        while True:
            action, memory = policy(observation, memory, rng)
            out = client.act(action)
            if out["error"] is not None:
                raise RunecrawlError(
                    f"gateway error: {out['error']['code']}: {out['error']['message']}")
            observation = out["observation"]
            if out["game_over"] is not None:
                payload = out["game_over"]
                report = MetricsReport(**payload["report"])
                return EpisodeResult(
                    report=report, history=None,
                    log_hash=payload["log_hash"],
                    log_path=payload.get("log_path"),
                )


def run_batch(
    agent: Union[str, AgentFn],
    setup: Union[ScenarioSpec, DungeonConfig, None],
    episodes: int,
    seed0: int = 0,
    turn_limit: Optional[int] = None,
    parallel: int = 1,
    out_dir: Optional[str] = None,
    remote: Optional[str] = None,
) -> tuple[AggregateReport, list[EpisodeResult]]:
    """Episodes on seeds seed0..seed0+n-1; parallelism never changes results."""
    if episodes < 1:
        raise RunecrawlError("run_batch needs at least one episode")
    seeds = list(range(seed0, seed0 + episodes))

    def play(seed: int) -> EpisodeResult:
        return run_episode(agent, setup, seed, turn_limit=turn_limit,
                           out_dir=out_dir, remote=remote)

    if parallel > 1:
        with ThreadPoolExecutor(max_workers=parallel) as pool:
            results = list(pool.map(play, seeds))
    else:
        results = [play(seed) for seed in seeds]
    return aggregate([r.report for r in results]), results
