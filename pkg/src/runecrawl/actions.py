"""The action vocabulary shared by the engine, gateway, and agents."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .worldgen import DIRECTIONS, Position

PRIMITIVES = (
    "move", "attack", "pickup", "ascend", "descend",
    "quaff", "read", "wield", "spend_xp", "wait",
)
MACROS = ("travel_to", "throw")

SKILLS = (
    "fighting", "short_blades", "long_blades", "maces",
    "dodging", "armour", "stealth", "evocations",
)


@dataclass(frozen=True)
class Action:
    kind: str
    direction: Optional[str] = None
    slot: Optional[str] = None
    target: Optional[Position] = None
    skill: Optional[str] = None

    def __post_init__(self):
        if self.kind not in PRIMITIVES and self.kind not in MACROS:
            raise ValueError(f"unknown action kind {self.kind!r}")
        if self.direction is not None and self.direction not in DIRECTIONS:
            raise ValueError(f"unknown direction {self.direction!r}")
        if self.kind in ("move", "attack") and self.direction is None:
            raise ValueError(f"{self.kind} requires a direction")
        if self.kind in ("quaff", "read", "wield", "throw") and self.slot is None:
            raise ValueError(f"{self.kind} requires an inventory slot")
        if self.kind == "spend_xp" and self.skill is None:
            raise ValueError("spend_xp requires a skill")
        if self.kind in ("travel_to", "throw") and self.target is None:
            raise ValueError(f"{self.kind} requires a target position")

    @property
    def is_macro(self) -> bool:
        return self.kind in MACROS

    # -- constructors ------------------------------------------------------

    @staticmethod
    def move(direction: str) -> "Action":
        return Action("move", direction=direction)

    @staticmethod
    def attack(direction: str) -> "Action":
        return Action("attack", direction=direction)

    @staticmethod
    def pickup() -> "Action":
        return Action("pickup")

    @staticmethod
    def ascend() -> "Action":
        return Action("ascend")

    @staticmethod
    def descend() -> "Action":
        return Action("descend")

    @staticmethod
    def quaff(slot: str) -> "Action":
        return Action("quaff", slot=slot)

    @staticmethod
    def read(slot: str, target: Optional[Position] = None) -> "Action":
        return Action("read", slot=slot, target=target)

    @staticmethod
    def wield(slot: str) -> "Action":
        return Action("wield", slot=slot)

    @staticmethod
    def spend_xp(skill: str) -> "Action":
        return Action("spend_xp", skill=skill)

    @staticmethod
    def wait() -> "Action":
        return Action("wait")

    @staticmethod
    def travel_to(target: Position) -> "Action":
        return Action("travel_to", target=target)

    @staticmethod
    def throw(slot: str, target: Position) -> "Action":
        return Action("throw", slot=slot, target=target)

    # -- wire form ---------------------------------------------------------

    def to_dict(self) -> dict:
        payload: dict = {"kind": self.kind}
        if self.direction is not None:
            payload["direction"] = self.direction
        if self.slot is not None:
            payload["slot"] = self.slot
        if self.target is not None:
            payload["target"] = [self.target.row, self.target.col]
        if self.skill is not None:
            payload["skill"] = self.skill
        return payload

    @staticmethod
    def from_dict(payload: dict) -> "Action":
        if not isinstance(payload, dict) or "kind" not in payload:
            raise ValueError("action payload must be an object with a 'kind'")
        target = payload.get("target")
        if target is not None:
            if (not isinstance(target, (list, tuple)) or len(target) != 2
                    or not all(isinstance(v, int) for v in target)):
                raise ValueError("target must be a [row, col] pair")
            target = Position(target[0], target[1])
        return Action(
            kind=payload["kind"],
            direction=payload.get("direction"),
            slot=payload.get("slot"),
            target=target,
            skill=payload.get("skill"),
        )
