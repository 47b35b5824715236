"""Every invented gameplay constant lives here, in one tunable table."""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class Balance:
    # melee: p(hit) = clamp(base + per_point * (accuracy - evasion), floor, ceiling)
    hit_base: float = 0.5
    hit_per_point: float = 0.03
    hit_floor: float = 0.05
    hit_ceiling: float = 0.95

    # player-derived combat stats
    strength_damage_divisor: int = 3     # damage bonus = strength // divisor
    unarmed_damage: int = 2

    # skill training: raising a skill from s to s+1 costs cost_per_level * (s + 1)
    skill_cost_per_level: int = 10
    skill_cap: int = 27

    # consumables
    curing_heal: int = 15

    # statuses inflicted by weapon brands
    venom_damage_per_turn: int = 1
    venom_turns: int = 5
    frost_extra_auts: int = 2
    frost_turns: int = 3

    # thrown weapons reuse the melee formula out to this Chebyshev range
    throw_range: int = 4

    # hydra rule: +1 head per qualifying hit; melee damage = base + heads
    hydra_head_increment: int = 1

    # shifting levels: chance per turn that an unseen interior tile flips
    shift_fraction: float = 0.05

    # starting player
    player_hp: int = 20
    player_strength: int = 8
    player_intellect: int = 8
    player_dexterity: int = 8

    # scoring (the score function is this artifact's own definition)
    score_per_rune: int = 250
    score_win_bonus: int = 5000


DEFAULT_BALANCE = Balance()

# Starting kit: (item spec id, count). Kept deliberately light.
STARTING_KIT = (("short_sword", 1), ("potion_curing", 2), ("scroll_blinking", 1))
