"""Authoritative game state and the turn-resolution step function.

Time is tracked in half-auts ("demi-auts") so that actors with half-integer
speeds settle exactly: an actor that spends 15 auts per 2 actions alternates
7- and 8-aut charges and lands on 1.5 turns precisely. 1 turn = 10 auts =
20 demi-auts.

A refused action still charges its full time cost; there is no free
information gathering.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from .actions import SKILLS, Action
from .balance import DEFAULT_BALANCE, STARTING_KIT, Balance
from .catalog import Catalog, ItemSpec, MonsterSpec, default_catalog
from .config import DungeonConfig
from .errors import (
    InsufficientXpError,
    RunecrawlError,
    SkillCapError,
    TerminalStateError,
)
from .fov import FOV_RADIUS, compute_fov, line_of_sight
from .metrics import EpisodeHistory
from .rng import RngStream, stream_for
from .worldgen import (
    DIRECTION_ORDER,
    DIRECTIONS,
    LevelMap,
    Position,
    Terrain,
    build_dungeon,
)

DEMI_PER_AUT = 2
AUTS_PER_TURN = 10
DEMI_PER_TURN = DEMI_PER_AUT * AUTS_PER_TURN

SLOT_LETTERS = "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ"

WIN_CONDITIONS = ("orb_exit", "reach_orb", "kill_all")


def _to_demi(speed_aut) -> int:
    """Accept whole or half-aut speeds; reject anything finer."""
    demi = round(speed_aut * DEMI_PER_AUT)
    if demi <= 0 or abs(demi - speed_aut * DEMI_PER_AUT) > 1e-9:
        raise ValueError(f"speed must be a positive multiple of 0.5 aut, got {speed_aut}")
    return demi


def _from_demi(demi: int):
    return demi // DEMI_PER_AUT if demi % DEMI_PER_AUT == 0 else demi / DEMI_PER_AUT


@dataclass
class PlayerCharacter:
    hp: int = DEFAULT_BALANCE.player_hp
    max_hp: int = DEFAULT_BALANCE.player_hp
    strength: int = DEFAULT_BALANCE.player_strength
    intellect: int = DEFAULT_BALANCE.player_intellect
    dexterity: int = DEFAULT_BALANCE.player_dexterity
    skills: dict[str, int] = field(default_factory=lambda: {s: 0 for s in SKILLS})
    xp_pool: int = 0
    xp_earned: int = 0
    inventory: dict[str, str] = field(default_factory=dict)  # slot letter -> item iid
    wielded: Optional[str] = None                            # slot letter
    runes_held: set[str] = field(default_factory=set)        # rune item iids
    has_orb: bool = False
    speed_demi: int = AUTS_PER_TURN * DEMI_PER_AUT           # 10 auts per action
    level_id: str = ""
    position: Position = Position(0, 0)
    alive: bool = True

    @property
    def speed_aut(self):
        return _from_demi(self.speed_demi)

    def set_speed_aut(self, speed_aut) -> None:
        self.speed_demi = _to_demi(speed_aut)

    def free_slot(self) -> Optional[str]:
        for letter in SLOT_LETTERS:
            if letter not in self.inventory:
                return letter
        return None


@dataclass
class Monster:
    aid: str
    spec: MonsterSpec
    hp: int
    position: Position
    level_id: str
    heads: Optional[int] = None            # hydras only
    statuses: dict[str, int] = field(default_factory=dict)  # name -> turns left
    energy_demi: int = 0

    @property
    def base_damage(self) -> int:
        if self.heads is not None:
            return self.spec.base_damage + self.heads
        return self.spec.base_damage

    def action_cost_demi(self) -> int:
        cost = self.spec.speed_aut * DEMI_PER_AUT
        if self.statuses.get("slowed", 0) > 0:
            cost += DEFAULT_BALANCE.frost_extra_auts * DEMI_PER_AUT
        return cost


class GameStatus:
    RUNNING = "running"
    DEAD = "dead"
    WON = "won"


@dataclass
class MeleeOutcome:
    hit: bool
    damage: int
    defender_killed: bool


@dataclass
class TileView:
    """What an observer knows about one tile: terrain plus item facts.

    ``occupant_glyph`` is only ever set in fresh (visible) views; remembered
    views drop it so memory never tracks monsters."""
    terrain: str
    items: tuple[tuple[str, str, str], ...] = ()   # (iid, spec id, category)
    occupant_glyph: Optional[str] = None

    def to_dict(self) -> dict:
        d: dict = {"terrain": self.terrain}
        if self.items:
            d["items"] = [list(entry) for entry in self.items]
        if self.occupant_glyph is not None:
            d["occupant"] = self.occupant_glyph
        return d

    @staticmethod
    def from_dict(d: dict) -> "TileView":
        return TileView(
            terrain=d["terrain"],
            items=tuple(tuple(entry) for entry in d.get("items", [])),
            occupant_glyph=d.get("occupant"),
        )


@dataclass
class MonsterView:
    aid: str
    glyph: str
    name: str
    position: Position
    is_hydra: bool = False
    heads: Optional[int] = None

    def to_dict(self) -> dict:
        d: dict = {
            "aid": self.aid, "glyph": self.glyph, "name": self.name,
            "position": [self.position.row, self.position.col],
        }
        if self.is_hydra:
            d["hydra"] = True
            d["heads"] = self.heads
        return d

    @staticmethod
    def from_dict(d: dict) -> "MonsterView":
        return MonsterView(
            aid=d["aid"], glyph=d["glyph"], name=d["name"],
            position=Position(d["position"][0], d["position"][1]),
            is_hydra=d.get("hydra", False), heads=d.get("heads"),
        )


@dataclass
class ItemView:
    iid: str
    spec_id: str
    category: str
    weapon_class: Optional[str] = None
    brand: Optional[str] = None
    base_damage: Optional[int] = None

    def to_dict(self) -> dict:
        d: dict = {"iid": self.iid, "item": self.spec_id, "category": self.category}
        if self.weapon_class:
            d["class"] = self.weapon_class
        if self.brand:
            d["brand"] = self.brand
        if self.base_damage is not None:
            d["damage"] = self.base_damage
        return d

    @staticmethod
    def from_dict(d: dict) -> "ItemView":
        return ItemView(
            iid=d["iid"], spec_id=d["item"], category=d["category"],
            weapon_class=d.get("class"), brand=d.get("brand"),
            base_damage=d.get("damage"),
        )


@dataclass
class ObservedState:
    level_id: str
    depth: int
    turn_count: float
    clock_aut: float
    status: str
    position: Position
    visible: dict[Position, TileView]
    remembered: dict[Position, TileView]
    player: dict
    monsters: list[MonsterView]
    inventory: dict[str, ItemView]
    messages: list[str]
    legal_actions: list[Action]

    def to_dict(self) -> dict:
        return {
            "level": self.level_id,
            "depth": self.depth,
            "turn": self.turn_count,
            "clock_aut": self.clock_aut,
            "status": self.status,
            "position": [self.position.row, self.position.col],
            "visible": {
                f"{p.row},{p.col}": view.to_dict()
                for p, view in sorted(self.visible.items())
            },
            "remembered": {
                f"{p.row},{p.col}": view.to_dict()
                for p, view in sorted(self.remembered.items())
            },
            "player": self.player,
            "monsters": [m.to_dict() for m in self.monsters],
            "inventory": {slot: iv.to_dict() for slot, iv in sorted(self.inventory.items())},
            "messages": list(self.messages),
            "legal_actions": [a.to_dict() for a in self.legal_actions],
        }

    @staticmethod
    def from_dict(d: dict) -> "ObservedState":
        def parse_tiles(section: dict) -> dict[Position, TileView]:
            out: dict[Position, TileView] = {}
            for key, view in section.items():
                row, col = key.split(",")
                out[Position(int(row), int(col))] = TileView.from_dict(view)
            return out

        return ObservedState(
            level_id=d["level"], depth=d["depth"], turn_count=d["turn"],
            clock_aut=d["clock_aut"], status=d["status"],
            position=Position(d["position"][0], d["position"][1]),
            visible=parse_tiles(d["visible"]),
            remembered=parse_tiles(d["remembered"]),
            player=d["player"],
            monsters=[MonsterView.from_dict(m) for m in d["monsters"]],
            inventory={slot: ItemView.from_dict(iv) for slot, iv in d["inventory"].items()},
            messages=list(d["messages"]),
            legal_actions=[Action.from_dict(a) for a in d["legal_actions"]],
        )


@dataclass
class StepResult:
    events: list[dict]
    messages: list[str]
    observation: ObservedState
    status: str


@dataclass
class GameState:
    levels: dict[str, LevelMap]
    items: dict[str, str]                    # item iid -> item spec id
    player: PlayerCharacter
    monsters: dict[str, Monster]
    catalog: Catalog
    history: EpisodeHistory
    balance: Balance = DEFAULT_BALANCE
    clock_demi: int = 0
    status: str = GameStatus.RUNNING
    win_condition: str = "orb_exit"
    turn_limit: Optional[int] = None
    seen: dict[str, dict[Position, TileView]] = field(default_factory=dict)
    pending_messages: list[str] = field(default_factory=list)
    combat_rng: RngStream = field(default_factory=lambda: stream_for(0, "combat"))
    monster_rng: RngStream = field(default_factory=lambda: stream_for(0, "monster_ai"))
    shift_rng: RngStream = field(default_factory=lambda: stream_for(0, "shift"))
    _fov_cache: Optional[tuple[str, Position, int, set[Position]]] = field(
        default=None, repr=False)

    @property
    def clock_aut(self):
        return _from_demi(self.clock_demi)

    @property
    def turn_count(self) -> float:
        return self.clock_demi / DEMI_PER_TURN

    @property
    def level(self) -> LevelMap:
        return self.levels[self.player.level_id]

    def item_spec(self, iid: str) -> ItemSpec:
        return self.catalog.item(self.items[iid])

    def fov(self) -> set[Position]:
        level = self.level
        key = (level.level_id, self.player.position, id(level))
        if self._fov_cache is not None and self._fov_cache[:3] == key:
            return self._fov_cache[3]
        result = compute_fov(level, self.player.position, FOV_RADIUS)
        self._fov_cache = (level.level_id, self.player.position, id(level), result)
        return result

    def invalidate_fov(self) -> None:
        self._fov_cache = None

    def monster_at(self, level_id: str, pos: Position) -> Optional[Monster]:
        aid = self.levels[level_id].tile(pos).occupant
        if aid is None:
            return None
        return self.monsters.get(aid)


# ---------------------------------------------------------------------------
# construction


def _spawn_monsters(game: GameState) -> None:
    for level in game.levels.values():
        for pos in level.positions():
            aid = level.tile(pos).occupant
            if aid is None:
                continue
            spec = game.catalog.monster(level.spawns[aid])
            game.monsters[aid] = Monster(
                aid=aid, spec=spec, hp=spec.max_hp, position=pos,
                level_id=level.level_id,
                heads=4 if spec.is_hydra else None,
            )


def _give_starting_kit(game: GameState) -> None:
    counter = 0
    for spec_id, count in STARTING_KIT:
        for _ in range(count):
            counter += 1
            iid = f"i_kit_{counter}"
            game.items[iid] = spec_id
            slot = game.player.free_slot()
            game.player.inventory[slot] = iid
    for slot, iid in game.player.inventory.items():
        if game.catalog.item(game.items[iid]).category == "weapon":
            game.player.wielded = slot
            break


def _remember_fov(game: GameState) -> None:
    memory = game.seen.setdefault(game.player.level_id, {})
    level = game.level
    for pos in game.fov():
        memory[pos] = _tile_view(game, level, pos, remembered=True)


def new_game(
    seed: int,
    config: Optional[DungeonConfig] = None,
    catalog: Optional[Catalog] = None,
    agent_name: str = "unknown",
) -> GameState:
    """Build the full dungeon for a standard run and drop the player on D:1."""
    config = config or DungeonConfig()
    config.validate()
    catalog = catalog or default_catalog()
    levels = build_dungeon(seed, config, catalog)

    items: dict[str, str] = {}
    for level in levels.values():
        items.update(level.items)

    history = EpisodeHistory.start(
        seed=seed, config_hash=config.content_hash(), agent=agent_name,
    )
    game = GameState(
        levels=levels, items=items, player=PlayerCharacter(),
        monsters={}, catalog=catalog, history=history,
        combat_rng=stream_for(seed, "combat"),
        monster_rng=stream_for(seed, "monster_ai"),
        shift_rng=stream_for(seed, "shift"),
    )
    _spawn_monsters(game)

    entry = levels["D:1"]
    exit_links = [s for s in entry.stairs if s.destination is None]
    start = exit_links[0].position
    if entry.tile(start).occupant is not None:
        _remove_monster(game, game.monsters[entry.tile(start).occupant], silent=True)
    game.player.level_id = "D:1"
    game.player.position = start
    _give_starting_kit(game)
    _remember_fov(game)
    return game


def _remove_monster(game: GameState, monster: Monster, silent: bool = False) -> None:
    game.levels[monster.level_id].tile(monster.position).occupant = None
    del game.monsters[monster.aid]


# ---------------------------------------------------------------------------
# combat


@dataclass(frozen=True)
class CombatantStats:
    accuracy: int
    evasion: int
    base_damage: int
    damage_bonus: int = 0


def hit_probability(attacker: CombatantStats, defender: CombatantStats,
                    balance: Balance = DEFAULT_BALANCE) -> float:
    p = balance.hit_base + balance.hit_per_point * (attacker.accuracy - defender.evasion)
    return min(max(p, balance.hit_floor), balance.hit_ceiling)


def resolve_melee(attacker: CombatantStats, defender: CombatantStats, rng: RngStream,
                  defender_hp: int, balance: Balance = DEFAULT_BALANCE) -> MeleeOutcome:
    p = hit_probability(attacker, defender, balance)
    if rng.uniform() >= p:
        return MeleeOutcome(hit=False, damage=0, defender_killed=False)
    damage = rng.randint(1, max(1, attacker.base_damage + attacker.damage_bonus))
    return MeleeOutcome(hit=True, damage=damage, defender_killed=damage >= defender_hp)


def apply_hydra_rule(monster: Monster, weapon: Optional[ItemSpec],
                     balance: Balance = DEFAULT_BALANCE) -> Monster:
    """A surviving hydra grows heads when cut with anything bladed and unfired."""
    if not monster.spec.is_hydra or monster.heads is None:
        raise RunecrawlError("hydra rule applied to a non-hydra")
    if weapon is not None and weapon.weapon_class == "bladed" and weapon.brand != "fire":
        monster.heads += balance.hydra_head_increment
    return monster


def spend_experience(player: PlayerCharacter, skill: str,
                     balance: Balance = DEFAULT_BALANCE) -> PlayerCharacter:
    """Raise a skill one level. Permanent; nothing in the engine lowers skills."""
    if skill not in player.skills:
        raise RunecrawlError(f"unknown skill {skill!r}")
    current = player.skills[skill]
    if current >= balance.skill_cap:
        raise SkillCapError(f"{skill} is already at {balance.skill_cap}")
    cost = balance.skill_cost_per_level * (current + 1)
    if player.xp_pool < cost:
        raise InsufficientXpError(f"{skill} {current}->{current + 1} costs {cost} xp")
    player.xp_pool -= cost
    player.skills[skill] = current + 1
    return player


def _player_weapon(game: GameState) -> Optional[ItemSpec]:
    slot = game.player.wielded
    if slot is None or slot not in game.player.inventory:
        return None
    return game.item_spec(game.player.inventory[slot])


def _weapon_skill(spec: Optional[ItemSpec]) -> str:
    if spec is None:
        return "fighting"
    return "maces" if spec.weapon_class == "blunt" else "long_blades"


def _player_attack_stats(game: GameState) -> CombatantStats:
    player, balance = game.player, game.balance
    weapon = _player_weapon(game)
    base = weapon.base_damage if weapon is not None else balance.unarmed_damage
    return CombatantStats(
        accuracy=player.dexterity + player.skills["fighting"]
                 + player.skills[_weapon_skill(weapon)],
        evasion=player.dexterity + player.skills["dodging"],
        base_damage=base,
        damage_bonus=player.strength // balance.strength_damage_divisor,
    )


def _monster_stats(monster: Monster) -> CombatantStats:
    return CombatantStats(
        accuracy=monster.spec.accuracy,
        evasion=monster.spec.evasion,
        base_damage=monster.base_damage,
    )


# ---------------------------------------------------------------------------
# observation


def _tile_view(game: GameState, level: LevelMap, pos: Position,
               remembered: bool = False) -> TileView:
    tile = level.tile(pos)
    items = tuple(
        (iid, game.items[iid], game.catalog.item(game.items[iid]).category)
        for iid in tile.items
    )
    glyph = None
    if not remembered and tile.occupant is not None:
        monster = game.monsters.get(tile.occupant)
        if monster is not None:
            glyph = monster.spec.glyph
    return TileView(terrain=tile.terrain.value, items=items, occupant_glyph=glyph)


def _item_view(game: GameState, iid: str) -> ItemView:
    spec = game.item_spec(iid)
    return ItemView(
        iid=iid, spec_id=spec.id, category=spec.category,
        weapon_class=spec.weapon_class, brand=spec.brand,
        base_damage=spec.base_damage,
    )


def legal_actions(game: GameState) -> list[Action]:
    """Templates for everything currently worth attempting."""
    player, level = game.player, game.level
    out = [Action.wait()]
    for direction in DIRECTION_ORDER:
        dest = player.position.step(direction)
        if not level.in_bounds(dest):
            continue
        tile = level.tile(dest)
        if tile.occupant is not None:
            out.append(Action.attack(direction))
        elif tile.passable:
            out.append(Action.move(direction))
    if level.tile(player.position).items:
        out.append(Action.pickup())
    terrain = level.tile(player.position).terrain
    if terrain == Terrain.STAIRS_UP:
        out.append(Action.ascend())
    if terrain == Terrain.STAIRS_DOWN:
        out.append(Action.descend())
    for slot in sorted(player.inventory):
        spec = game.item_spec(player.inventory[slot])
        if spec.category == "potion":
            out.append(Action.quaff(slot))
        elif spec.category == "scroll":
            out.append(Action.read(slot))
        elif spec.category == "weapon" and slot != player.wielded:
            out.append(Action.wield(slot))
    for skill in SKILLS:
        current = player.skills[skill]
        if current < game.balance.skill_cap and \
                player.xp_pool >= game.balance.skill_cost_per_level * (current + 1):
            out.append(Action.spend_xp(skill))
    return out


def observe(game: GameState, messages: Optional[list[str]] = None) -> ObservedState:
    """Project the agent-visible slice of the game. Pure read, no memory update."""
    player, level = game.player, game.level
    fov = game.fov()
    visible = {pos: _tile_view(game, level, pos) for pos in fov}
    memory = game.seen.get(player.level_id, {})
    remembered = {pos: view for pos, view in memory.items() if pos not in fov}

    monsters = []
    for aid in sorted(game.monsters):
        monster = game.monsters[aid]
        if monster.level_id == player.level_id and monster.position in fov:
            monsters.append(MonsterView(
                aid=aid, glyph=monster.spec.glyph, name=monster.spec.id,
                position=monster.position, is_hydra=monster.spec.is_hydra,
                heads=monster.heads,
            ))

    player_view = {
        "hp": player.hp, "max_hp": player.max_hp,
        "strength": player.strength, "intellect": player.intellect,
        "dexterity": player.dexterity,
        "skills": dict(sorted(player.skills.items())),
        "xp_pool": player.xp_pool, "xp_earned": player.xp_earned,
        "speed_aut": player.speed_aut,
        "runes": sorted(player.runes_held),
        "has_orb": player.has_orb,
        "wielded": player.wielded,
    }
    return ObservedState(
        level_id=player.level_id, depth=level.depth,
        turn_count=game.turn_count, clock_aut=game.clock_aut,
        status=game.status, position=player.position,
        visible=visible, remembered=remembered,
        player=player_view, monsters=monsters,
        inventory={slot: _item_view(game, iid) for slot, iid in sorted(player.inventory.items())},
        messages=list(messages or []),
        legal_actions=legal_actions(game),
    )


# ---------------------------------------------------------------------------
# the step function


def _refuse(events: list[dict], messages: list[str], reason: str, text: str) -> None:
    events.append({"type": "refused", "reason": reason})
    messages.append(text)


def _kill_monster(game: GameState, monster: Monster, events: list[dict],
                  messages: list[str]) -> None:
    events.append({"type": "killed", "actor": monster.aid, "monster": monster.spec.id})
    messages.append(f"The {monster.spec.id} dies.")
    game.player.xp_pool += monster.spec.xp_value
    game.player.xp_earned += monster.spec.xp_value
    _remove_monster(game, monster)


def _player_strike(game: GameState, monster: Monster, events: list[dict],
                   messages: list[str], thrown: bool = False) -> None:
    stats = _player_attack_stats(game)
    outcome = resolve_melee(stats, _monster_stats(monster), game.combat_rng,
                            monster.hp, game.balance)
    weapon = _player_weapon(game)
    if not outcome.hit:
        events.append({"type": "missed", "attacker": "player", "target": monster.aid})
        messages.append(f"You miss the {monster.spec.id}.")
        return
    monster.hp -= outcome.damage
    events.append({"type": "hit", "attacker": "player", "target": monster.aid,
                   "damage": outcome.damage})
    messages.append(f"You hit the {monster.spec.id} for {outcome.damage}.")
    if monster.hp <= 0:
        _kill_monster(game, monster, events, messages)
        return
    if monster.spec.is_hydra:
        before = monster.heads
        apply_hydra_rule(monster, weapon, game.balance)
        if monster.heads != before:
            messages.append("Another head grows in its place!")
    if weapon is not None and weapon.brand == "venom":
        monster.statuses["poisoned"] = game.balance.venom_turns
    if weapon is not None and weapon.brand == "frost":
        monster.statuses["slowed"] = game.balance.frost_turns


def _ray_targets(game: GameState, direction: str, max_range: int) -> Optional[Monster]:
    """First monster along a compass ray within range; walls stop the ray."""
    level = game.level
    pos = game.player.position
    for _ in range(max_range):
        pos = pos.step(direction)
        if not level.in_bounds(pos) or level.tile(pos).opaque:
            return None
        if level.tile(pos).occupant is not None:
            return game.monsters.get(level.tile(pos).occupant)
    return None


def _drop_item(game: GameState, iid: str, pos: Position) -> None:
    level = game.level
    target = pos
    if not level.passable_at(target):
        target = game.player.position
    level.tile(target).items.append(iid)


def _do_attack(game: GameState, direction: str, events: list[dict],
               messages: list[str]) -> None:
    adjacent = game.player.position.step(direction)
    level = game.level
    if level.in_bounds(adjacent) and level.tile(adjacent).occupant is not None:
        monster = game.monsters[level.tile(adjacent).occupant]
        _player_strike(game, monster, events, messages)
        return
    # no adjacent target: a wielded weapon flies down the ray instead
    weapon_slot = game.player.wielded
    if weapon_slot is None or weapon_slot not in game.player.inventory:
        _refuse(events, messages, "no-target", "There is nothing there to attack.")
        return
    monster = _ray_targets(game, direction, game.balance.throw_range)
    iid = game.player.inventory[weapon_slot]
    if monster is None:
        _refuse(events, messages, "no-target", "Your weapon sails through empty air.")
        return
    landing = monster.position
    _player_strike(game, monster, events, messages, thrown=True)
    del game.player.inventory[weapon_slot]
    game.player.wielded = None
    _drop_item(game, iid, landing)
    messages.append("The weapon clatters to the ground.")


def _do_move(game: GameState, direction: str, events: list[dict],
             messages: list[str]) -> None:
    player, level = game.player, game.level
    dest = player.position.step(direction)
    if not level.in_bounds(dest) or not level.tile(dest).passable:
        _refuse(events, messages, "blocked", "You bump into something solid.")
        return
    if level.tile(dest).occupant is not None:
        _refuse(events, messages, "occupied", "Something is in the way.")
        return
    level.tile(player.position).occupant = None
    player.position = dest
    game.invalidate_fov()
    events.append({"type": "moved", "to": [dest.row, dest.col]})


def _do_pickup(game: GameState, events: list[dict], messages: list[str]) -> None:
    player, level = game.player, game.level
    tile = level.tile(player.position)
    if not tile.items:
        _refuse(events, messages, "nothing-here", "There is nothing here to pick up.")
        return
    remaining: list[str] = []
    picked_any = False
    for iid in tile.items:
        spec = game.item_spec(iid)
        if spec.category == "rune":
            player.runes_held.add(iid)
            events.append({"type": "picked_up", "item": iid, "category": "rune"})
            messages.append("You pick up a glowing rune!")
            picked_any = True
        elif spec.category == "orb":
            player.has_orb = True
            events.append({"type": "picked_up", "item": iid, "category": "orb"})
            messages.append("You lift the Orb! Now escape the dungeon.")
            picked_any = True
        else:
            slot = player.free_slot()
            if slot is None:
                remaining.append(iid)
                continue
            player.inventory[slot] = iid
            events.append({"type": "picked_up", "item": iid, "category": spec.category})
            messages.append(f"You pick up the {spec.id} ({slot}).")
            picked_any = True
    tile.items[:] = remaining
    if not picked_any:
        _refuse(events, messages, "inventory-full", "Your pack is full.")


def _do_quaff(game: GameState, slot: Optional[str], events: list[dict],
              messages: list[str]) -> None:
    player = game.player
    if slot is None or slot not in player.inventory:
        _refuse(events, messages, "empty-slot", "You have nothing in that slot.")
        return
    iid = player.inventory[slot]
    spec = game.item_spec(iid)
    if spec.category != "potion":
        _refuse(events, messages, "not-a-potion", f"You can't drink the {spec.id}.")
        return
    player.hp = min(player.max_hp, player.hp + game.balance.curing_heal)
    del player.inventory[slot]
    events.append({"type": "quaffed", "item": iid})
    messages.append("You feel better.")


def _do_read(game: GameState, slot: Optional[str], target: Optional[Position],
             events: list[dict], messages: list[str]) -> None:
    player, level = game.player, game.level
    if slot is None or slot not in player.inventory:
        _refuse(events, messages, "empty-slot", "You have nothing in that slot.")
        return
    iid = player.inventory[slot]
    spec = game.item_spec(iid)
    if spec.category != "scroll":
        _refuse(events, messages, "not-a-scroll", f"You can't read the {spec.id}.")
        return
    if target is None:
        _refuse(events, messages, "needs-target", "The scroll demands a destination.")
        return
    if target not in game.fov():
        _refuse(events, messages, "not-visible", "You can only blink to a spot you can see.")
        return
    if not level.passable_at(target) or level.tile(target).occupant is not None:
        _refuse(events, messages, "bad-destination", "You can't blink there.")
        return
    level.tile(player.position).occupant = None
    player.position = target
    game.invalidate_fov()
    del player.inventory[slot]
    if player.wielded == slot:
        player.wielded = None
    events.append({"type": "blinked", "to": [target.row, target.col]})
    messages.append("You blink!")


def _do_wield(game: GameState, slot: Optional[str], events: list[dict],
              messages: list[str]) -> None:
    player = game.player
    if slot is None or slot not in player.inventory:
        _refuse(events, messages, "empty-slot", "You have nothing in that slot.")
        return
    spec = game.item_spec(player.inventory[slot])
    if spec.category != "weapon":
        _refuse(events, messages, "not-a-weapon", f"You can't wield the {spec.id}.")
        return
    player.wielded = slot
    events.append({"type": "wielded", "item": player.inventory[slot]})
    messages.append(f"You wield the {spec.id}.")


def _do_spend_xp(game: GameState, skill: Optional[str], events: list[dict],
                 messages: list[str]) -> None:
    try:
        spend_experience(game.player, skill, game.balance)
    except (SkillCapError, InsufficientXpError, RunecrawlError) as exc:
        _refuse(events, messages, "training", str(exc))
        return
    value = game.player.skills[skill]
    events.append({"type": "leveled", "skill": skill, "value": value})
    messages.append(f"Your {skill} skill is now {value}.")


def _move_player_to_level(game: GameState, dest_level_id: str,
                          arrive_from: str) -> None:
    level = game.levels[dest_level_id]
    back = [s for s in level.stairs if s.destination == arrive_from]
    landing = back[0].position if back else level.passable_positions()[0]
    occupant = level.tile(landing).occupant
    if occupant is not None:
        # shove the squatter to a free neighbor; remove it if truly boxed in
        monster = game.monsters[occupant]
        for neighbor in landing.neighbors8():
            if level.passable_at(neighbor) and level.tile(neighbor).occupant is None:
                level.tile(landing).occupant = None
                level.tile(neighbor).occupant = monster.aid
                monster.position = neighbor
                break
        else:
            _remove_monster(game, monster)
    game.levels[game.player.level_id].tile(game.player.position).occupant = None
    game.player.level_id = dest_level_id
    game.player.position = landing
    game.invalidate_fov()


def check_win(game: GameState) -> str:
    """Current game status under the active win condition."""
    if game.status != GameStatus.RUNNING:
        return game.status
    if game.win_condition == "reach_orb" and game.player.has_orb:
        return GameStatus.WON
    if game.win_condition == "kill_all" and not any(
            m.level_id == game.player.level_id for m in game.monsters.values()):
        return GameStatus.WON
    return game.status


def _do_descend(game: GameState, events: list[dict], messages: list[str]) -> None:
    level = game.level
    link = level.stairs_at(game.player.position)
    if link is None or level.tile(game.player.position).terrain != Terrain.STAIRS_DOWN:
        _refuse(events, messages, "no-stairs", "There are no stairs down here.")
        return
    dest = link.destination
    if dest is None or dest not in game.levels:
        _refuse(events, messages, "sealed", "These stairs lead nowhere.")
        return
    if game.levels[dest].branch == "Zot" and len(game.player.runes_held) < 3:
        _refuse(events, messages, "need-runes",
                "A seal bars the way: three runes are required.")
        return
    _move_player_to_level(game, dest, level.level_id)
    events.append({"type": "moved", "to_level": dest})
    messages.append(f"You descend to {dest}.")


def _do_ascend(game: GameState, events: list[dict], messages: list[str]) -> None:
    level = game.level
    link = level.stairs_at(game.player.position)
    if link is None or level.tile(game.player.position).terrain != Terrain.STAIRS_UP:
        _refuse(events, messages, "no-stairs", "There are no stairs up here.")
        return
    if link.destination is None:
        # the dungeon exit
        if game.win_condition == "orb_exit" and game.player.has_orb:
            game.status = GameStatus.WON
            events.append({"type": "won"})
            messages.append("You escape with the Orb. You win!")
        else:
            _refuse(events, messages, "no-orb",
                    "You cannot leave empty-handed: the Orb is still below.")
        return
    if link.destination not in game.levels:
        _refuse(events, messages, "sealed", "These stairs lead nowhere.")
        return
    _move_player_to_level(game, link.destination, level.level_id)
    events.append({"type": "moved", "to_level": link.destination})
    messages.append(f"You climb to {link.destination}.")


def _resolve_player_action(game: GameState, action: Action,
                           events: list[dict], messages: list[str]) -> None:
    if action.kind == "wait":
        pass
    elif action.kind == "move":
        _do_move(game, action.direction, events, messages)
    elif action.kind == "attack":
        _do_attack(game, action.direction, events, messages)
    elif action.kind == "pickup":
        _do_pickup(game, events, messages)
    elif action.kind == "quaff":
        _do_quaff(game, action.slot, events, messages)
    elif action.kind == "read":
        _do_read(game, action.slot, action.target, events, messages)
    elif action.kind == "wield":
        _do_wield(game, action.slot, events, messages)
    elif action.kind == "spend_xp":
        _do_spend_xp(game, action.skill, events, messages)
    elif action.kind == "ascend":
        _do_ascend(game, events, messages)
    elif action.kind == "descend":
        _do_descend(game, events, messages)
    else:
        raise RunecrawlError(f"unhandled primitive {action.kind!r}")


def _monster_act(game: GameState, monster: Monster, events: list[dict],
                 messages: list[str]) -> None:
    player, level = game.player, game.levels[monster.level_id]
    if monster.position.chebyshev(player.position) <= 1:
        outcome = resolve_melee(_monster_stats(monster), _player_defense_stats(game),
                                game.combat_rng, player.hp, game.balance)
        if outcome.hit:
            player.hp -= outcome.damage
            events.append({"type": "hit", "attacker": monster.aid, "target": "player",
                           "damage": outcome.damage})
            messages.append(f"The {monster.spec.id} hits you for {outcome.damage}.")
        else:
            events.append({"type": "missed", "attacker": monster.aid, "target": "player"})
            messages.append(f"The {monster.spec.id} misses you.")
        return
    sees_player = line_of_sight(level, monster.position, player.position, FOV_RADIUS)
    candidates = [
        pos for pos in monster.position.neighbors8()
        if level.passable_at(pos) and level.tile(pos).occupant is None
        and pos != player.position
    ]
    if not candidates:
        return
    if sees_player:
        best = min(
            candidates,
            key=lambda pos: (pos.chebyshev(player.position),
                             (pos.row - player.position.row) ** 2
                             + (pos.col - player.position.col) ** 2,
                             pos.row, pos.col),
        )
        if best.chebyshev(player.position) >= monster.position.chebyshev(player.position):
            return
        dest = best
    else:
        dest = candidates[game.monster_rng.randrange(len(candidates))]
    level.tile(monster.position).occupant = None
    level.tile(dest).occupant = monster.aid
    monster.position = dest


def _player_defense_stats(game: GameState) -> CombatantStats:
    player = game.player
    return CombatantStats(
        accuracy=0, evasion=player.dexterity + player.skills["dodging"],
        base_damage=1,
    )


def monster_turns(game: GameState, charge_demi: int, events: list[dict],
                  messages: list[str]) -> None:
    """Give every monster on the active level its share of elapsed time.

    Each monster banks ``charge_demi`` and acts once per full action cost it
    can afford: attack when adjacent, chase while the player is in sight,
    otherwise drift one random step.
    """
    level_id = game.player.level_id
    for aid in sorted(game.monsters):
        monster = game.monsters.get(aid)
        if monster is None or monster.level_id != level_id:
            continue
        monster.energy_demi += charge_demi
        while monster.aid in game.monsters and \
                monster.energy_demi >= monster.action_cost_demi():
            monster.energy_demi -= monster.action_cost_demi()
            _monster_act(game, monster, events, messages)
            if game.player.hp <= 0:
                return


def _tick_statuses(game: GameState, whole_turns: int, events: list[dict],
                   messages: list[str]) -> None:
    if whole_turns <= 0:
        return
    for aid in sorted(game.monsters):
        monster = game.monsters.get(aid)
        if monster is None:
            continue
        for _ in range(whole_turns):
            if monster.statuses.get("poisoned", 0) > 0:
                monster.statuses["poisoned"] -= 1
                monster.hp -= game.balance.venom_damage_per_turn
                if monster.hp <= 0:
                    messages.append(f"The {monster.spec.id} succumbs to the poison.")
                    _kill_monster(game, monster, events, messages)
                    break
            if monster.statuses.get("slowed", 0) > 0:
                monster.statuses["slowed"] -= 1


def mutate_unseen(level: LevelMap, visible: set[Position], rng: RngStream,
                  protect: set[Position], fraction: float) -> bool:
    """Flip a fraction of unseen interior wall/floor tiles on a shifting level.

    Tiles currently visible, on the border, holding items, stairs, occupants,
    or in ``protect`` never change. Afterwards the visible region is
    re-connected to a staircase by carving an L-corridor if the shuffle
    severed it. Returns whether anything changed.
    """
    if not level.shifting:
        return False
    changed = False
    for pos in level.positions():
        if pos in visible or pos in protect:
            continue
        if pos.row in (0, level.rows - 1) or pos.col in (0, level.cols - 1):
            continue
        tile = level.tile(pos)
        if tile.items or tile.occupant is not None:
            continue
        if tile.terrain not in (Terrain.FLOOR, Terrain.WALL):
            continue
        if rng.uniform() < fraction:
            tile.terrain = Terrain.WALL if tile.terrain == Terrain.FLOOR else Terrain.FLOOR
            changed = True
    if changed and level.stairs:
        anchor = next(iter(protect)) if protect else None
        if anchor is not None:
            reachable = _shift_flood(level, anchor)
            if not any(link.position in reachable for link in level.stairs):
                nearest = min(
                    level.stairs,
                    key=lambda link: link.position.chebyshev(anchor),
                )
                _carve_straight(level, anchor, nearest.position)
    return changed


def _shift_flood(level: LevelMap, start: Position) -> set[Position]:
    seen = {start}
    frontier = [start]
    while frontier:
        pos = frontier.pop()
        for nxt in pos.neighbors8():
            if nxt not in seen and level.passable_at(nxt):
                seen.add(nxt)
                frontier.append(nxt)
    return seen


def _carve_straight(level: LevelMap, start: Position, end: Position) -> None:
    r, c = start.row, start.col
    while c != end.col:
        c += 1 if end.col > c else -1
        if level.grid[r][c].terrain == Terrain.WALL:
            level.grid[r][c].terrain = Terrain.FLOOR
    while r != end.row:
        r += 1 if end.row > r else -1
        if level.grid[r][c].terrain == Terrain.WALL:
            level.grid[r][c].terrain = Terrain.FLOOR


def step(game: GameState, action: Action) -> StepResult:
    """Advance the world by one player action (primitive only).

    Raises TerminalStateError once the game is over. Every accepted or
    refused action charges the player's full action cost, fuels monster
    energy, ticks statuses, mutates shifting terrain, refreshes map memory,
    and appends one record to the episode history.
    """
    if game.status != GameStatus.RUNNING:
        raise TerminalStateError(f"game is over ({game.status})")
    if action.is_macro:
        raise RunecrawlError(f"{action.kind} is a macro; expand it before stepping")

    events: list[dict] = []
    messages: list[str] = []
    if game.pending_messages:
        messages.extend(game.pending_messages)
        game.pending_messages.clear()

    _resolve_player_action(game, action, events, messages)

    # The action always costs time, even when refused or game-winning.
    turn_before = game.clock_demi // DEMI_PER_TURN
    charge = game.player.speed_demi
    game.clock_demi += charge

    if game.status == GameStatus.RUNNING:
        monster_turns(game, charge, events, messages)
        _tick_statuses(game, game.clock_demi // DEMI_PER_TURN - turn_before,
                       events, messages)

        if game.player.hp <= 0:
            game.player.alive = False
            game.status = GameStatus.DEAD
            events.append({"type": "died"})
            messages.append("You die...")
        elif check_win(game) == GameStatus.WON:
            game.status = GameStatus.WON
            events.append({"type": "won"})
            messages.append("You win!")

        level = game.level
        if level.shifting and game.status == GameStatus.RUNNING:
            if mutate_unseen(level, game.fov(), game.shift_rng,
                             {game.player.position}, game.balance.shift_fraction):
                game.invalidate_fov()

    _remember_fov(game)
    game.history.append_step(
        turn=game.turn_count, clock_aut=game.clock_aut,
        action=action.to_dict(), events=events,
        level_id=game.player.level_id, depth=game.level.depth,
        hp=game.player.hp, xp_earned=game.player.xp_earned,
    )
    observation = observe(game, messages)
    return StepResult(events=events, messages=messages,
                      observation=observation, status=game.status)
