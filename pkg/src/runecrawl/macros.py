"""Macro actions: single commands that expand into primitive sequences.

Expansion happens against an observation, never against ground truth, so a
macro can only use knowledge the agent already has. The gateway executes the
expansion step by step and aborts the remainder when a step is refused or a
new monster comes into view.
"""

from __future__ import annotations

from collections import deque
from typing import Optional

from .actions import Action
from .balance import DEFAULT_BALANCE
from .engine import ObservedState
from .errors import MacroError
from .worldgen import DIRECTION_ORDER, PASSABLE, Position

_PASSABLE_NAMES = {t.value for t in PASSABLE}


def known_passable(obs: ObservedState) -> set[Position]:
    tiles: dict[Position, str] = {}
    for pos, view in obs.remembered.items():
        tiles[pos] = view.terrain
    for pos, view in obs.visible.items():
        tiles[pos] = view.terrain
    return {pos for pos, terrain in tiles.items() if terrain in _PASSABLE_NAMES}


def shortest_path(obs: ObservedState, target: Position) -> Optional[list[str]]:
    """8-way BFS over known passable tiles; None when unreachable."""
    passable = known_passable(obs)
    if target not in passable:
        return None
    start = obs.position
    if start == target:
        return []
    parents: dict[Position, tuple[Position, str]] = {}
    queue = deque([start])
    seen = {start}
    while queue:
        pos = queue.popleft()
        for direction in DIRECTION_ORDER:
            nxt = pos.step(direction)
            if nxt in seen or nxt not in passable:
                continue
            parents[nxt] = (pos, direction)
            if nxt == target:
                steps: list[str] = []
                node = target
                while node != start:
                    node, direction = parents[node]
                    steps.append(direction)
                steps.reverse()
                return steps
            seen.add(nxt)
            queue.append(nxt)
    return None


def expand_macro(macro: Action, obs: ObservedState) -> list[Action]:
    """Resolve a macro into primitives, or raise MacroError before any step runs."""
    if not macro.is_macro:
        raise MacroError(f"{macro.kind} is not a macro")
    if macro.kind == "travel_to":
        steps = shortest_path(obs, macro.target)
        if steps is None:
            raise MacroError(f"no known path to {macro.target}")
        if not steps:
            raise MacroError("already there")
        return [Action.move(direction) for direction in steps]

    # throw: wield-check then release along the ray toward the target
    slot = macro.slot
    if slot not in obs.inventory:
        raise MacroError(f"no item in slot {slot!r}")
    if obs.inventory[slot].category != "weapon":
        raise MacroError("only weapons can be thrown")
    if macro.target not in obs.visible:
        raise MacroError("throw target is not visible")
    distance = obs.position.chebyshev(macro.target)
    if distance > DEFAULT_BALANCE.throw_range:
        raise MacroError(f"target out of range ({distance} > {DEFAULT_BALANCE.throw_range})")
    direction = obs.position.direction_to(macro.target)
    if direction is None:
        raise MacroError("throw target must lie on a straight compass ray")
    return [Action.wield(slot), Action.attack(direction)]


def macro_interrupted(before: ObservedState, after: ObservedState) -> Optional[str]:
    """Reason to abort a macro mid-flight, or None to continue."""
    known = {m.aid for m in before.monsters}
    newcomers = [m.aid for m in after.monsters if m.aid not in known]
    if newcomers:
        return f"monster sighted: {newcomers[0]}"
    return None
