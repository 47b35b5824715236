"""Baseline policies: random, rule bot, and the planning bot.

A policy is a pure function (observation, memory, rng) -> (action, memory).
Memory is whatever the policy wants to carry between decisions; passing the
same (obs, memory, rng state) always returns the same action.
"""

from __future__ import annotations

from typing import Callable, Optional

from .actions import Action
from .engine import ObservedState
from .errors import ExportError
from .macros import known_passable, shortest_path
from .pddl import PddlGoal, export_domain, export_problem, ground_plan
from .planner import solve
from .rng import RngStream
from .worldgen import DIRECTION_ORDER, Position

AgentFn = Callable[[ObservedState, dict, RngStream], tuple[Action, dict]]


def random_agent(obs: ObservedState, memory: dict, rng: RngStream) -> tuple[Action, dict]:
    """Uniform choice among the legal action templates."""
    choices = obs.legal_actions
    action = choices[rng.randrange(len(choices))]
    if action.kind == "read" and action.target is None:
        floors = sorted(p for p, v in obs.visible.items() if v.terrain == "floor")
        if floors:
            action = Action.read(action.slot, floors[rng.randrange(len(floors))])
    return action, memory


# ---------------------------------------------------------------------------
# rule bot


def _adjacent_monsters(obs: ObservedState):
    return [m for m in obs.monsters if obs.position.chebyshev(m.position) == 1]


def _find_slot(obs: ObservedState, predicate) -> Optional[str]:
    for slot in sorted(obs.inventory):
        if predicate(obs.inventory[slot]):
            return slot
    return None


def _item_targets(obs: ObservedState) -> list[Position]:
    """Known tiles with collectable items, nearest first."""
    tiles: dict[Position, tuple] = {}
    for pos, view in obs.remembered.items():
        tiles[pos] = view.items
    for pos, view in obs.visible.items():
        tiles[pos] = view.items
    targets = [pos for pos, items in tiles.items() if items]
    targets.sort(key=lambda p: (obs.position.chebyshev(p), p))
    return targets


def _frontier_targets(obs: ObservedState) -> list[Position]:
    """Known passable tiles bordering unknown space, nearest first."""
    passable = known_passable(obs)
    known = set(obs.remembered) | set(obs.visible)
    frontier = [
        pos for pos in passable
        if any(n not in known for n in pos.neighbors8())
    ]
    frontier.sort(key=lambda p: (obs.position.chebyshev(p), p))
    return frontier


def _stairs_down(obs: ObservedState) -> list[Position]:
    tiles: dict[Position, str] = {}
    for pos, view in obs.remembered.items():
        tiles[pos] = view.terrain
    for pos, view in obs.visible.items():
        tiles[pos] = view.terrain
    return sorted(p for p, t in tiles.items() if t == "stairs_down")


def _step_toward(obs: ObservedState, target: Position) -> Optional[Action]:
    steps = shortest_path(obs, target)
    if not steps:
        return None
    return Action.move(steps[0])


def rulebot_agent(obs: ObservedState, memory: dict, rng: RngStream) -> tuple[Action, dict]:
    """Six auditable rules, checked in priority order."""
    legal_kinds = {a.kind for a in obs.legal_actions}

    # 1. drink when hurt
    if obs.player["hp"] < 0.4 * obs.player["max_hp"]:
        slot = _find_slot(obs, lambda item: item.category == "potion")
        if slot is not None:
            return Action.quaff(slot), memory

    # 2. fight whatever stands next to us, swapping to a blunt weapon for hydras
    adjacent = _adjacent_monsters(obs)
    if adjacent:
        hydra = next((m for m in adjacent if m.is_hydra), None)
        if hydra is not None:
            wielded = obs.player.get("wielded")
            wielded_class = obs.inventory[wielded].weapon_class if wielded in obs.inventory else None
            if wielded_class != "blunt":
                blunt = _find_slot(obs, lambda item: item.weapon_class == "blunt")
                if blunt is not None:
                    return Action.wield(blunt), memory
        target = min(adjacent, key=lambda m: (m.aid,))
        direction = obs.position.direction_to(target.position)
        if direction is not None:
            return Action.attack(direction), memory

    # 3. loot underfoot
    if "pickup" in legal_kinds:
        return Action.pickup(), memory

    # 4. walk toward the nearest uncollected item, then the exploration frontier
    for target in _item_targets(obs) + _frontier_targets(obs):
        if target == obs.position:
            continue
        action = _step_toward(obs, target)
        if action is not None:
            return action, memory

    # 5. level explored: head downstairs
    if "descend" in legal_kinds:
        return Action.descend(), memory
    for target in _stairs_down(obs):
        action = _step_toward(obs, target)
        if action is not None:
            return action, memory

    # 6. nothing else to do: train fighting
    for action in obs.legal_actions:
        if action.kind == "spend_xp" and action.skill == "fighting":
            return action, memory

    moves = [a for a in obs.legal_actions if a.kind == "move"]
    if moves:
        return moves[rng.randrange(len(moves))], memory
    return Action.wait(), memory


# ---------------------------------------------------------------------------
# planning bot


def _choose_goal(obs: ObservedState) -> Optional[PddlGoal]:
    """Nearest collectable item (orb preferred), else stairs, else frontier."""
    orb_tiles = []
    item_tiles = []
    tiles = dict(obs.remembered)
    tiles.update(obs.visible)
    for pos, view in sorted(tiles.items()):
        for iid, _spec, category in view.items:
            if category == "orb":
                orb_tiles.append((pos, iid))
            else:
                item_tiles.append((pos, iid))
    if orb_tiles:
        return PddlGoal.has_orb()
    if item_tiles:
        item_tiles.sort(key=lambda entry: (obs.position.chebyshev(entry[0]), entry[1]))
        return PddlGoal.holding(item_tiles[0][1])
    stairs = _stairs_down(obs)
    if stairs:
        return PddlGoal.at(stairs[0])
    frontier = [p for p in _frontier_targets(obs) if p != obs.position]
    if frontier:
        return PddlGoal.at(frontier[0])
    return None


def planner_agent(obs: ObservedState, memory: dict, rng: RngStream) -> tuple[Action, dict]:
    """Plan with the internal BFS solver over the exported model; follow the
    plan until it is interrupted, then replan. Falls back to random moves when
    no goal is reachable."""
    memory.setdefault("plan", [])
    memory.setdefault("replans", 0)
    memory.setdefault("goal", None)

    known = {m.aid for m in obs.monsters}
    if memory.get("known_monsters") is not None and known - memory["known_monsters"]:
        if memory["plan"]:
            memory["replans"] += 1
        memory["plan"] = []
    memory["known_monsters"] = known

    if memory["plan"]:
        planned = memory["plan"][0]
        if planned.kind == "move":
            dest = obs.position.step(planned.direction)
            blocked = dest not in obs.visible or \
                obs.visible[dest].terrain not in ("floor", "shallow_water",
                                                  "stairs_up", "stairs_down") or \
                obs.visible[dest].occupant_glyph is not None
            if blocked:
                memory["replans"] += 1
                memory["plan"] = []
    if not memory["plan"]:
        goal = _choose_goal(obs)
        memory["goal"] = goal
        if goal is not None:
            try:
                problem = export_problem(obs, goal)
                result = solve(export_domain(), problem, max_expansions=40_000)
            except ExportError:
                result = None
            if result is not None and result.steps:
                try:
                    memory["plan"] = ground_plan(result.text(), obs)
                except Exception:
                    memory["plan"] = []
    if memory["plan"]:
        return memory["plan"].pop(0), memory

    # no reachable goal: wander
    moves = [a for a in obs.legal_actions if a.kind in ("move", "descend", "pickup")]
    if moves:
        return moves[rng.randrange(len(moves))], memory
    return Action.wait(), memory


AGENTS: dict[str, AgentFn] = {
    "random": random_agent,
    "rulebot": rulebot_agent,
    "planner": planner_agent,
}
