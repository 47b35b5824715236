"""Episode histories, per-episode metrics, aggregates, and the state-space
lower-bound calculator.

A history is append-only: one record per action plus at most one terminal
record (outcome won/dead/truncated). Persisted form is line-delimited JSON,
header line first, so a report recomputed from disk matches the live one
byte for byte.
"""

from __future__ import annotations

import hashlib
import json
import statistics
from dataclasses import dataclass, field
from datetime import datetime, timezone
from decimal import Decimal, localcontext
from typing import Optional

from .errors import SealedHistoryError

TERMINAL_OUTCOMES = ("won", "dead", "truncated")


@dataclass
class EpisodeRecord:
    turn: float
    clock_aut: float
    action: Optional[dict]
    events: list[dict]
    level_id: str
    depth: int
    hp: int
    xp_earned: int
    outcome: Optional[str] = None     # set only on the terminal record
    wall_time_s: Optional[float] = None

    def to_dict(self) -> dict:
        d = {
            "turn": self.turn, "clock_aut": self.clock_aut, "action": self.action,
            "events": self.events, "level": self.level_id, "depth": self.depth,
            "hp": self.hp, "xp": self.xp_earned,
        }
        if self.outcome is not None:
            d["outcome"] = self.outcome
            d["wall_time_s"] = self.wall_time_s
        return d

    @staticmethod
    def from_dict(d: dict) -> "EpisodeRecord":
        return EpisodeRecord(
            turn=d["turn"], clock_aut=d["clock_aut"], action=d["action"],
            events=d["events"], level_id=d["level"], depth=d["depth"],
            hp=d["hp"], xp_earned=d["xp"],
            outcome=d.get("outcome"), wall_time_s=d.get("wall_time_s"),
        )


@dataclass
class EpisodeHistory:
    header: dict
    records: list[EpisodeRecord] = field(default_factory=list)
    sealed: bool = False

    @staticmethod
    def start(seed: int, config_hash: str, agent: str,
              scenario: Optional[str] = None) -> "EpisodeHistory":
        header = {
            "seed": seed,
            "config_hash": config_hash,
            "agent": agent,
            "started_at": datetime.now(timezone.utc).isoformat(),
        }
        if scenario is not None:
            header["scenario"] = scenario
        return EpisodeHistory(header=header)

    def append(self, record: EpisodeRecord) -> None:
        if self.sealed:
            raise SealedHistoryError("history already holds a terminal record")
        if self.records and record.turn < self.records[-1].turn:
            raise ValueError("record turns must be non-decreasing")
        self.records.append(record)
        if record.outcome is not None:
            self.sealed = True

    def append_step(self, turn, clock_aut, action, events, level_id, depth,
                    hp, xp_earned) -> None:
        self.append(EpisodeRecord(
            turn=turn, clock_aut=clock_aut, action=action, events=events,
            level_id=level_id, depth=depth, hp=hp, xp_earned=xp_earned,
        ))

    def seal(self, outcome: str, wall_time_s: float) -> None:
        """Append the terminal record. The wall time rides in the record so a
        replay from disk reproduces the report exactly."""
        if outcome not in TERMINAL_OUTCOMES:
            raise ValueError(f"unknown outcome {outcome!r}")
        last = self.records[-1] if self.records else None
        self.append(EpisodeRecord(
            turn=last.turn if last else 0.0,
            clock_aut=last.clock_aut if last else 0,
            action=None, events=[{"type": "episode_end", "outcome": outcome}],
            level_id=last.level_id if last else "",
            depth=last.depth if last else 0,
            hp=last.hp if last else 0,
            xp_earned=last.xp_earned if last else 0,
            outcome=outcome, wall_time_s=round(wall_time_s, 3),
        ))

    # -- persistence --------------------------------------------------------

    def to_jsonl(self) -> str:
        lines = [json.dumps({"header": self.header}, sort_keys=True)]
        lines.extend(json.dumps(r.to_dict(), sort_keys=True) for r in self.records)
        return "\n".join(lines) + "\n"

    @staticmethod
    def from_jsonl(text: str) -> "EpisodeHistory":
        lines = [line for line in text.splitlines() if line.strip()]
        if not lines:
            raise ValueError("empty episode log")
        head = json.loads(lines[0])
        history = EpisodeHistory(header=head["header"])
        for line in lines[1:]:
            history.append(EpisodeRecord.from_dict(json.loads(line)))
        return history

    def content_hash(self) -> str:
        """Hash of the deterministic content: records minus wall-clock fields."""
        digest = hashlib.sha256()
        for record in self.records:
            d = record.to_dict()
            d.pop("wall_time_s", None)
            digest.update(json.dumps(d, sort_keys=True).encode())
            digest.update(b"\n")
        return digest.hexdigest()


def record_event(history: EpisodeHistory, record: EpisodeRecord) -> EpisodeHistory:
    """Functional-style append; errors after the terminal record."""
    history.append(record)
    return history


@dataclass
class MetricsReport:
    won: bool
    runes_collected: int
    max_depth_reached: int
    levels_visited: int
    turns: float
    actions: int
    monsters_killed: int
    xp_earned: int
    score: int
    wall_time_s: float
    truncated: bool = False

    def to_dict(self) -> dict:
        return {
            "won": self.won, "runes_collected": self.runes_collected,
            "max_depth_reached": self.max_depth_reached,
            "levels_visited": self.levels_visited, "turns": self.turns,
            "actions": self.actions, "monsters_killed": self.monsters_killed,
            "xp_earned": self.xp_earned, "score": self.score,
            "wall_time_s": self.wall_time_s, "truncated": self.truncated,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


SCORE_PER_RUNE = 250
SCORE_WIN_BONUS = 5000


def episode_metrics(history: EpisodeHistory) -> MetricsReport:
    """Fold a sealed history into its report. Pure function of the records."""
    if not history.sealed:
        raise SealedHistoryError("episode_metrics needs a sealed history")
    terminal = history.records[-1]
    won = terminal.outcome == "won"
    runes = 0
    kills = 0
    for record in history.records:
        for event in record.events:
            if event.get("type") == "picked_up" and event.get("category") == "rune":
                runes += 1
            elif event.get("type") == "killed":
                kills += 1
    xp = terminal.xp_earned
    return MetricsReport(
        won=won,
        runes_collected=runes,
        max_depth_reached=max((r.depth for r in history.records), default=0),
        levels_visited=len({r.level_id for r in history.records if r.level_id}),
        turns=terminal.turn,
        actions=sum(1 for r in history.records if r.action is not None),
        monsters_killed=kills,
        xp_earned=xp,
        score=xp + SCORE_PER_RUNE * runes + (SCORE_WIN_BONUS if won else 0),
        wall_time_s=terminal.wall_time_s or 0.0,
        truncated=terminal.outcome == "truncated",
    )


@dataclass
class AggregateReport:
    games: int
    wins: int
    win_rate: float
    mean_turns: float
    median_turns: float
    mean_score: float
    distributions: dict[str, dict]

    @property
    def win_rate_text(self) -> str:
        return format_percent(self.win_rate)

    def to_dict(self) -> dict:
        return {
            "games": self.games, "wins": self.wins,
            "win_rate": self.win_rate, "win_rate_text": self.win_rate_text,
            "mean_turns": self.mean_turns, "median_turns": self.median_turns,
            "mean_score": self.mean_score, "distributions": self.distributions,
        }

    def to_table(self) -> str:
        rows = [
            ("games", str(self.games)),
            ("wins", str(self.wins)),
            ("win rate", self.win_rate_text),
            ("mean turns", f"{self.mean_turns:.1f}"),
            ("median turns", f"{self.median_turns:.1f}"),
            ("mean score", f"{self.mean_score:.1f}"),
        ]
        for metric in sorted(self.distributions):
            d = self.distributions[metric]
            rows.append((metric, f"min {d['min']:.6g}  median {d['median']:.6g}  "
                                 f"mean {d['mean']:.6g}  max {d['max']:.6g}"))
        width = max(len(name) for name, _ in rows)
        return "\n".join(f"{name.ljust(width)}  {value}" for name, value in rows)


def format_percent(rate: float) -> str:
    return f"{rate * 100:.1f}%"


_DIST_METRICS = ("turns", "actions", "runes_collected", "max_depth_reached",
                 "levels_visited", "monsters_killed", "xp_earned", "score")


def aggregate(reports: list[MetricsReport]) -> AggregateReport:
    if not reports:
        raise ValueError("aggregate() needs at least one report")
    wins = sum(1 for r in reports if r.won)
    turns = [r.turns for r in reports]
    distributions = {}
    for metric in _DIST_METRICS:
        values = [getattr(r, metric) for r in reports]
        distributions[metric] = {
            "min": min(values), "max": max(values),
            "mean": statistics.fmean(values),
            "median": statistics.median(values),
        }
    return AggregateReport(
        games=len(reports), wins=wins, win_rate=wins / len(reports),
        mean_turns=statistics.fmean(turns),
        median_turns=statistics.median(turns),
        mean_score=statistics.fmean([r.score for r in reports]),
        distributions=distributions,
    )


def state_space_lower_bound(tiles: int, occupants: int) -> float:
    """log10 of the number of ways to scatter the occupants over the tiles,
    i.e. occupants * log10(tiles). Computed at high precision and rounded
    once, never materializing the count itself."""
    if tiles < 1 or occupants < 1:
        raise ValueError("tiles and occupants must be positive")
    if occupants > tiles:
        raise ValueError("occupants cannot exceed tiles")
    with localcontext() as ctx:
        ctx.prec = 50
        return float(Decimal(occupants) * Decimal(tiles).log10())
