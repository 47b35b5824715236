"""Export observations as classical planning problems (STRIPS + typing).

The domain models non-combat navigation only: move, pickup, descend, ascend.
Problems are closed-world over what the agent has actually seen; tiles it has
never observed simply do not exist as objects, so replanning on new
observations is the intended loop.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Optional

from .actions import Action
from .engine import ObservedState, TileView
from .errors import ExportError, GroundingError
from .worldgen import PASSABLE, Position, Terrain

DOMAIN_NAME = "runecrawl"

_PASSABLE_NAMES = {t.value for t in PASSABLE}


@dataclass(frozen=True)
class PddlGoal:
    """One of: at(position) | holding(item) | has_runes(count) | has_orb."""
    kind: str
    position: Optional[Position] = None
    item: Optional[str] = None
    count: Optional[int] = None

    def __post_init__(self):
        if self.kind not in ("at", "holding", "has_runes", "has_orb"):
            raise ValueError(f"unknown goal kind {self.kind!r}")
        if self.kind == "at" and self.position is None:
            raise ValueError("at goal needs a position")
        if self.kind == "holding" and self.item is None:
            raise ValueError("holding goal needs an item id")
        if self.kind == "has_runes" and (self.count is None or self.count < 1):
            raise ValueError("has_runes goal needs a positive count")

    @staticmethod
    def at(position: Position) -> "PddlGoal":
        return PddlGoal("at", position=position)

    @staticmethod
    def holding(item: str) -> "PddlGoal":
        return PddlGoal("holding", item=item)

    @staticmethod
    def has_runes(count: int) -> "PddlGoal":
        return PddlGoal("has_runes", count=count)

    @staticmethod
    def has_orb() -> "PddlGoal":
        return PddlGoal("has_orb")


def _sanitize(name: str) -> str:
    return re.sub(r"[^A-Za-z0-9_]", "", name)


def tile_object(level_id: str, pos: Position) -> str:
    return f"t_{_sanitize(level_id)}_{pos.row}_{pos.col}"


def item_object(iid: str) -> str:
    return _sanitize(iid)


DOMAIN_TEXT = f"""(define (domain {DOMAIN_NAME})
  (:requirements :strips :typing)
  (:types tile item)
  (:predicates
    (at ?t - tile)
    (adjacent ?t1 - tile ?t2 - tile)
    (passable ?t - tile)
    (item-at ?i - item ?t - tile)
    (holding ?i - item)
    (stairs-down ?t - tile)
    (stairs-up ?t - tile))
  (:action move
    :parameters (?from - tile ?to - tile)
    :precondition (and (at ?from) (adjacent ?from ?to) (passable ?to))
    :effect (and (not (at ?from)) (at ?to)))
  (:action pickup
    :parameters (?i - item ?t - tile)
    :precondition (and (at ?t) (item-at ?i ?t))
    :effect (and (holding ?i) (not (item-at ?i ?t))))
  (:action descend
    :parameters (?t - tile)
    :precondition (and (at ?t) (stairs-down ?t))
    :effect (and (not (at ?t))))
  (:action ascend
    :parameters (?t - tile)
    :precondition (and (at ?t) (stairs-up ?t))
    :effect (and (not (at ?t)))))
"""


def export_domain(config=None) -> str:
    """The static non-combat domain; byte-identical on every call."""
    return DOMAIN_TEXT


@dataclass
class _ObsIndex:
    """Shared view of an observation used by both export and grounding."""
    level_id: str
    tiles: dict[Position, TileView]
    tile_names: dict[str, Position]
    items: dict[str, tuple[str, Optional[Position]]]  # iid -> (category, tile or None)
    item_names: dict[str, str]                        # object name -> iid
    held: set[str]

    @staticmethod
    def build(obs: ObservedState) -> "_ObsIndex":
        tiles: dict[Position, TileView] = {}
        tiles.update(obs.remembered)
        tiles.update(obs.visible)
        items: dict[str, tuple[str, Optional[Position]]] = {}
        for pos in sorted(tiles):
            for iid, _spec, category in tiles[pos].items:
                items[iid] = (category, pos)
        held = set()
        for view in obs.inventory.values():
            items[view.iid] = (view.category, None)
            held.add(view.iid)
        for rune_iid in obs.player.get("runes", []):
            items[rune_iid] = ("rune", None)
            held.add(rune_iid)
        return _ObsIndex(
            level_id=obs.level_id,
            tiles=tiles,
            tile_names={tile_object(obs.level_id, p): p for p in tiles},
            items=items,
            item_names={item_object(iid): iid for iid in items},
            held=held,
        )

    def passable(self, pos: Position) -> bool:
        return self.tiles[pos].terrain in _PASSABLE_NAMES


def export_problem(obs: ObservedState, goal: PddlGoal, name: str = "obs") -> str:
    """Serialize the observation plus goal as a PDDL problem.

    Raises ExportError when the goal references anything the agent has never
    seen (the closed-world contract).
    """
    index = _ObsIndex.build(obs)
    goal_text = _goal_text(index, goal, obs)

    tile_names = sorted(index.tile_names)
    item_names = sorted(index.item_names)

    init: list[str] = [f"(at {tile_object(obs.level_id, obs.position)})"]
    for pos in sorted(index.tiles):
        tname = tile_object(obs.level_id, pos)
        view = index.tiles[pos]
        if index.passable(pos):
            init.append(f"(passable {tname})")
        if view.terrain == Terrain.STAIRS_DOWN.value:
            init.append(f"(stairs-down {tname})")
        if view.terrain == Terrain.STAIRS_UP.value:
            init.append(f"(stairs-up {tname})")
    for pos in sorted(index.tiles):
        for neighbor in pos.neighbors8():
            if neighbor in index.tiles:
                init.append(
                    f"(adjacent {tile_object(obs.level_id, pos)} "
                    f"{tile_object(obs.level_id, neighbor)})")
    for iid in sorted(index.items):
        category, pos = index.items[iid]
        if iid in index.held:
            init.append(f"(holding {item_object(iid)})")
        elif pos is not None:
            init.append(f"(item-at {item_object(iid)} {tile_object(obs.level_id, pos)})")

    turn_tag = str(obs.turn_count).replace(".", "_")
    lines = [
        f"(define (problem {_sanitize(name)}_{turn_tag})",
        f"  (:domain {DOMAIN_NAME})",
        "  (:objects",
    ]
    if tile_names:
        lines.append("    " + " ".join(tile_names) + " - tile")
    if item_names:
        lines.append("    " + " ".join(item_names) + " - item")
    lines.append("  )")
    lines.append("  (:init")
    lines.extend(f"    {fact}" for fact in init)
    lines.append("  )")
    lines.append(f"  (:goal {goal_text})")
    lines.append(")")
    return "\n".join(lines) + "\n"


def _goal_text(index: _ObsIndex, goal: PddlGoal, obs: ObservedState) -> str:
    if goal.kind == "at":
        if goal.position not in index.tiles:
            raise ExportError(f"goal tile {goal.position} has never been observed")
        return f"(at {tile_object(index.level_id, goal.position)})"
    if goal.kind == "holding":
        if goal.item not in index.items:
            raise ExportError(f"goal item {goal.item!r} has never been observed")
        return f"(holding {item_object(goal.item)})"
    if goal.kind == "has_orb":
        orbs = [iid for iid, (category, _) in sorted(index.items.items())
                if category == "orb"]
        if not orbs:
            raise ExportError("no orb has been observed")
        return f"(holding {item_object(orbs[0])})"
    # has_runes: a conjunction over specific runes, held ones first
    runes = [iid for iid, (category, _) in sorted(index.items.items())
             if category == "rune"]
    runes.sort(key=lambda iid: (iid not in index.held, iid))
    if len(runes) < goal.count:
        raise ExportError(
            f"goal wants {goal.count} runes but only {len(runes)} are known")
    parts = " ".join(f"(holding {item_object(iid)})" for iid in runes[: goal.count])
    return f"(and {parts})"


_STEP_RE = re.compile(r"\(\s*([a-zA-Z_][\w-]*)((?:\s+[\w-]+)*)\s*\)")


def parse_plan(plan_text: str) -> list[tuple[str, list[str]]]:
    steps = []
    for match in _STEP_RE.finditer(plan_text):
        name = match.group(1).lower()
        args = match.group(2).split()
        steps.append((name, args))
    return steps


def ground_plan(plan_text: str, obs: ObservedState) -> list[Action]:
    """Map a plan's steps onto engine primitives, or fail naming the step."""
    index = _ObsIndex.build(obs)
    actions: list[Action] = []
    here = obs.position
    for step_no, (name, args) in enumerate(parse_plan(plan_text), start=1):
        label = f"step {step_no} ({name} {' '.join(args)})"
        if name == "move":
            if len(args) != 2:
                raise GroundingError(f"{label}: move wants two tiles")
            src, dst = args
            if src not in index.tile_names or dst not in index.tile_names:
                raise GroundingError(f"{label}: unknown tile object")
            frm, to = index.tile_names[src], index.tile_names[dst]
            direction = frm.direction_to(to)
            if direction is None or frm.chebyshev(to) != 1:
                raise GroundingError(f"{label}: tiles are not adjacent")
            if frm != here:
                raise GroundingError(f"{label}: move starts at {frm}, not {here}")
            actions.append(Action.move(direction))
            here = to
        elif name == "pickup":
            if args and args[0] not in index.item_names:
                raise GroundingError(f"{label}: unknown item object")
            actions.append(Action.pickup())
        elif name == "descend":
            actions.append(Action.descend())
        elif name == "ascend":
            actions.append(Action.ascend())
        else:
            raise GroundingError(f"{label}: no such action in the domain")
    return actions
