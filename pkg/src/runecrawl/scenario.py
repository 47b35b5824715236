"""Custom scenario files: parse, render, and instantiate as playable games.

Format (UTF-8, ``.scen``): ``key: value`` header lines, then a ``map:`` line
introducing the grid, then an optional ``legend:`` section of
``glyph = entity`` overrides. The grid must be rectangular, fully enclosed in
``#``, and contain exactly one ``@``.

Built-in glyphs: ``#`` wall, ``.`` floor, ``@`` player start, ``0`` orb,
``*`` rune, ``<`` stairs up (dungeon exit), ``>`` stairs down (sealed),
``~`` shallow water, ``W`` deep water, ``L`` lava, ``!`` potion of curing,
``?`` scroll of blinking, ``(`` short sword; any lowercase letter that
matches a catalog monster glyph spawns that monster.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .catalog import Catalog, default_catalog
from .engine import GameState, PlayerCharacter, _give_starting_kit, _remember_fov, _spawn_monsters
from .errors import ScenarioParseError
from .metrics import EpisodeHistory
from .rng import stream_for
from .worldgen import LevelMap, Position, StairLink, Terrain, Tile

WIN_CONDITIONS = ("orb_exit", "reach_orb", "kill_all")

_TERRAIN_GLYPHS = {
    "#": Terrain.WALL,
    ".": Terrain.FLOOR,
    "~": Terrain.SHALLOW_WATER,
    "W": Terrain.DEEP_WATER,
    "L": Terrain.LAVA,
    "<": Terrain.STAIRS_UP,
    ">": Terrain.STAIRS_DOWN,
}

_ITEM_GLYPHS = {
    "0": "orb",
    "*": "rune",
    "!": "potion_curing",
    "?": "scroll_blinking",
    "(": "short_sword",
}


@dataclass(frozen=True)
class ScenarioSpec:
    name: str
    grid: tuple[str, ...]
    default_seed: int = 0
    shifting: bool = False
    turn_limit: Optional[int] = None
    win: str = "orb_exit"
    legend: tuple[tuple[str, str], ...] = ()

    @property
    def rows(self) -> int:
        return len(self.grid)

    @property
    def cols(self) -> int:
        return len(self.grid[0]) if self.grid else 0

    def legend_map(self) -> dict[str, str]:
        return dict(self.legend)

    def player_start(self) -> Position:
        for r, row in enumerate(self.grid):
            c = row.find("@")
            if c >= 0:
                return Position(r, c)
        raise ValueError("spec has no player start")


def _parse_bool(value: str, lineno: int) -> bool:
    if value in ("true", "yes", "1"):
        return True
    if value in ("false", "no", "0"):
        return False
    raise ScenarioParseError(f"expected a boolean, got {value!r}", lineno)


def parse_scenario(text: str, catalog: Optional[Catalog] = None) -> ScenarioSpec:
    """Parse scenario text; every rejection names its line (and column)."""
    catalog = catalog or default_catalog()
    name = "scenario"
    default_seed = 0
    shifting = False
    turn_limit: Optional[int] = None
    win = "orb_exit"
    grid: list[str] = []
    legend: list[tuple[str, str]] = []
    grid_start_line = 0

    lines = text.splitlines()
    mode = "header"
    for lineno, raw in enumerate(lines, start=1):
        if mode == "header":
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if ":" not in line:
                raise ScenarioParseError("expected 'key: value'", lineno)
            key, value = (part.strip() for part in line.split(":", 1))
            if key == "map":
                mode = "grid"
                grid_start_line = lineno + 1
            elif key == "name":
                name = value
            elif key == "seed":
                try:
                    default_seed = int(value)
                except ValueError:
                    raise ScenarioParseError(f"bad seed {value!r}", lineno) from None
            elif key == "shifting":
                shifting = _parse_bool(value, lineno)
            elif key == "turn_limit":
                try:
                    turn_limit = int(value)
                except ValueError:
                    raise ScenarioParseError(f"bad turn_limit {value!r}", lineno) from None
            elif key == "win":
                if value not in WIN_CONDITIONS:
                    raise ScenarioParseError(
                        f"win must be one of {', '.join(WIN_CONDITIONS)}", lineno)
                win = value
            else:
                raise ScenarioParseError(f"unknown header key {key!r}", lineno)
        elif mode == "grid":
            if raw.strip() == "legend:":
                mode = "legend"
                continue
            if not raw.strip():
                if grid:
                    mode = "after_grid"
                continue
            grid.append(raw.rstrip("\n"))
        elif mode == "after_grid":
            if raw.strip() == "legend:":
                mode = "legend"
            elif raw.strip():
                raise ScenarioParseError("unexpected text after the map", lineno)
        else:  # legend
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ScenarioParseError("legend wants 'glyph = entity'", lineno)
            glyph, entity = (part.strip() for part in line.split("=", 1))
            if len(glyph) != 1:
                raise ScenarioParseError("legend glyph must be one character", lineno)
            if entity not in catalog.monsters and entity not in catalog.items:
                raise ScenarioParseError(f"unknown entity {entity!r}", lineno)
            legend.append((glyph, entity))

    if mode == "header":
        raise ScenarioParseError("missing 'map:' section", len(lines) or 1)
    if not grid:
        raise ScenarioParseError("empty map", grid_start_line or 1)

    width = len(grid[0])
    for i, row in enumerate(grid):
        if len(row) != width:
            raise ScenarioParseError(
                f"grid is not rectangular: row is {len(row)} wide, expected {width}",
                grid_start_line + i, len(row) + 1)

    legend_map = dict(legend)
    starts: list[tuple[int, int]] = []
    for r, row in enumerate(grid):
        for c, glyph in enumerate(row):
            lineno, col = grid_start_line + r, c + 1
            on_border = r in (0, len(grid) - 1) or c in (0, width - 1)
            if on_border and glyph != "#":
                raise ScenarioParseError(
                    f"map must be enclosed by '#', found {glyph!r}", lineno, col)
            if glyph == "@":
                starts.append((r, c))
                continue
            if glyph in _TERRAIN_GLYPHS or glyph in _ITEM_GLYPHS or glyph in legend_map:
                continue
            if glyph.islower() and catalog.monster_by_glyph(glyph) is not None:
                continue
            raise ScenarioParseError(f"unknown glyph {glyph!r}", lineno, col)
    if len(starts) != 1:
        where = ", ".join(f"({r},{c})" for r, c in starts) or "none"
        first = starts[1] if len(starts) > 1 else (0, 0)
        raise ScenarioParseError(
            f"expected exactly one '@', found {len(starts)} at {where}",
            grid_start_line + first[0], first[1] + 1)

    return ScenarioSpec(
        name=name, grid=tuple(grid), default_seed=default_seed,
        shifting=shifting, turn_limit=turn_limit, win=win,
        legend=tuple(sorted(legend_map.items())),
    )


def render_scenario(spec: ScenarioSpec) -> str:
    """Canonical text form; parse_scenario(render_scenario(s)) == s."""
    lines = [f"name: {spec.name}", f"seed: {spec.default_seed}",
             f"shifting: {'true' if spec.shifting else 'false'}"]
    if spec.turn_limit is not None:
        lines.append(f"turn_limit: {spec.turn_limit}")
    lines.append(f"win: {spec.win}")
    lines.append("map:")
    lines.extend(spec.grid)
    if spec.legend:
        lines.append("legend:")
        for glyph, entity in sorted(spec.legend):
            lines.append(f"{glyph} = {entity}")
    return "\n".join(lines) + "\n"


def instantiate_scenario(
    spec: ScenarioSpec,
    seed: Optional[int] = None,
    catalog: Optional[Catalog] = None,
    agent_name: str = "unknown",
) -> GameState:
    """Build a single-level game from the spec. Deterministic in (spec, seed)."""
    catalog = catalog or default_catalog()
    seed = spec.default_seed if seed is None else seed
    level_id = "scenario:1"
    grid = [[Tile() for _ in range(spec.cols)] for _ in range(spec.rows)]
    level = LevelMap(level_id=level_id, branch="scenario", depth=1,
                     grid=grid, shifting=spec.shifting)
    legend = spec.legend_map()
    start: Optional[Position] = None

    def add_item(pos: Position, spec_id: str) -> None:
        iid = f"i_{level_id}_{len(level.items) + 1}"
        level.items[iid] = spec_id
        level.tile(pos).items.append(iid)

    def add_monster(pos: Position, spec_id: str) -> None:
        aid = f"m_{level_id}_{len(level.spawns) + 1}"
        level.spawns[aid] = spec_id
        level.tile(pos).occupant = aid

    for r, row in enumerate(spec.grid):
        for c, glyph in enumerate(row):
            pos = Position(r, c)
            tile = level.tile(pos)
            if glyph == "@":
                tile.terrain = Terrain.FLOOR
                start = pos
            elif glyph in legend:
                tile.terrain = Terrain.FLOOR
                entity = legend[glyph]
                if entity in catalog.monsters:
                    add_monster(pos, entity)
                else:
                    add_item(pos, entity)
            elif glyph in _TERRAIN_GLYPHS:
                tile.terrain = _TERRAIN_GLYPHS[glyph]
                if glyph == "<":
                    level.stairs.append(StairLink(pos, None))
                elif glyph == ">":
                    level.stairs.append(StairLink(pos, None))
            elif glyph in _ITEM_GLYPHS:
                tile.terrain = Terrain.FLOOR
                add_item(pos, _ITEM_GLYPHS[glyph])
            else:
                tile.terrain = Terrain.FLOOR
                add_monster(pos, catalog.monster_by_glyph(glyph).id)

    history = EpisodeHistory.start(
        seed=seed, config_hash=f"scenario:{spec.name}", agent=agent_name,
        scenario=spec.name,
    )
    game = GameState(
        levels={level_id: level}, items=dict(level.items),
        player=PlayerCharacter(level_id=level_id, position=start),
        monsters={}, catalog=catalog, history=history,
        win_condition=spec.win, turn_limit=spec.turn_limit,
        combat_rng=stream_for(seed, "combat"),
        monster_rng=stream_for(seed, "monster_ai"),
        shift_rng=stream_for(seed, "shift"),
    )
    _spawn_monsters(game)
    _give_starting_kit(game)
    _remember_fov(game)
    return game


OPEN_ROOM = """\
name: open_room
seed: 7
shifting: false
turn_limit: 400
win: reach_orb
map:
######################
#....................#
#....................#
#....................#
#..@.................#
#....................#
#....................#
#................0...#
#....................#
#....................#
#....................#
######################
"""

SMALL_ROOM = """\
name: small_room
seed: 7
shifting: false
turn_limit: 120
win: reach_orb
map:
#########
#.......#
#.@.....#
#.....0.#
#.......#
#########
"""

BUILTIN_SCENARIOS = {"open_room": OPEN_ROOM, "small_room": SMALL_ROOM}


def builtin_scenario(name: str, catalog: Optional[Catalog] = None) -> ScenarioSpec:
    return parse_scenario(BUILTIN_SCENARIOS[name], catalog)
