"""Deterministic dungeon generation: layout, level grids, and population.

Levels are rooms-and-corridors: non-overlapping rectangular rooms joined
sequentially by L-shaped corridors, which guarantees connectivity by
construction. Every randomized choice draws from an explicit RngStream, so
identical (seed, config) always reproduces the identical dungeon.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Iterator, Optional

from .catalog import Catalog
from .config import DungeonConfig
from .errors import ConfigError
from .rng import RngStream, stream_for

FOV_RADIUS = 7

DIRECTIONS = {
    "n": (-1, 0), "ne": (-1, 1), "e": (0, 1), "se": (1, 1),
    "s": (1, 0), "sw": (1, -1), "w": (0, -1), "nw": (-1, -1),
}
DIRECTION_ORDER = ("n", "ne", "e", "se", "s", "sw", "w", "nw")


@dataclass(frozen=True, order=True)
class Position:
    row: int
    col: int

    def step(self, direction: str) -> "Position":
        dr, dc = DIRECTIONS[direction]
        return Position(self.row + dr, self.col + dc)

    def chebyshev(self, other: "Position") -> int:
        return max(abs(self.row - other.row), abs(self.col - other.col))

    def neighbors8(self) -> Iterator["Position"]:
        for name in DIRECTION_ORDER:
            yield self.step(name)

    def direction_to(self, other: "Position") -> Optional[str]:
        """Compass name if other is exactly on one of the 8 rays from here."""
        dr, dc = other.row - self.row, other.col - self.col
        if (dr, dc) == (0, 0):
            return None
        if dr == 0 or dc == 0 or abs(dr) == abs(dc):
            unit = (0 if dr == 0 else dr // abs(dr), 0 if dc == 0 else dc // abs(dc))
            for name, delta in DIRECTIONS.items():
                if delta == unit:
                    return name
        return None


class Terrain(Enum):
    FLOOR = "floor"
    WALL = "wall"
    SHALLOW_WATER = "shallow_water"
    DEEP_WATER = "deep_water"
    LAVA = "lava"
    STAIRS_UP = "stairs_up"
    STAIRS_DOWN = "stairs_down"


PASSABLE = {Terrain.FLOOR, Terrain.SHALLOW_WATER, Terrain.STAIRS_UP, Terrain.STAIRS_DOWN}
OPAQUE = {Terrain.WALL}

_TERRAIN_TEXT = {
    Terrain.FLOOR: "a stone floor",
    Terrain.WALL: "a rock wall",
    Terrain.SHALLOW_WATER: "a pool of shallow water",
    Terrain.DEEP_WATER: "deep, dark water",
    Terrain.LAVA: "a river of molten lava",
    Terrain.STAIRS_UP: "a staircase leading up",
    Terrain.STAIRS_DOWN: "a staircase leading down",
}


@dataclass
class Tile:
    terrain: Terrain = Terrain.WALL
    items: list[str] = field(default_factory=list)   # item instance ids, bottom-up
    occupant: Optional[str] = None                   # actor id

    @property
    def passable(self) -> bool:
        return self.terrain in PASSABLE

    @property
    def opaque(self) -> bool:
        return self.terrain in OPAQUE

    def describe(self) -> str:
        text = _TERRAIN_TEXT[self.terrain]
        if self.items:
            text += f"; {len(self.items)} item(s) here"
        return text


@dataclass(frozen=True)
class StairLink:
    position: Position
    destination: Optional[str]   # level id; None marks the dungeon exit on D:1


@dataclass
class LevelMap:
    level_id: str
    branch: str
    depth: int
    grid: list[list[Tile]]
    shifting: bool = False
    stairs: list[StairLink] = field(default_factory=list)
    items: dict[str, str] = field(default_factory=dict)    # instance id -> item spec id
    spawns: dict[str, str] = field(default_factory=dict)   # actor id -> monster spec id

    @property
    def rows(self) -> int:
        return len(self.grid)

    @property
    def cols(self) -> int:
        return len(self.grid[0])

    def in_bounds(self, pos: Position) -> bool:
        return 0 <= pos.row < self.rows and 0 <= pos.col < self.cols

    def tile(self, pos: Position) -> Tile:
        return self.grid[pos.row][pos.col]

    def passable_at(self, pos: Position) -> bool:
        return self.in_bounds(pos) and self.tile(pos).passable

    def opaque_at(self, pos: Position) -> bool:
        return not self.in_bounds(pos) or self.tile(pos).opaque

    def positions(self) -> Iterator[Position]:
        for r in range(self.rows):
            for c in range(self.cols):
                yield Position(r, c)

    def passable_positions(self) -> list[Position]:
        return [p for p in self.positions() if self.tile(p).passable]

    def stairs_at(self, pos: Position) -> Optional[StairLink]:
        for link in self.stairs:
            if link.position == pos:
                return link
        return None


@dataclass(frozen=True)
class LevelDescriptor:
    level_id: str
    branch: str
    depth: int
    rune: bool = False
    orb: bool = False
    up_links: tuple[Optional[str], ...] = ()
    down_links: tuple[str, ...] = ()


@dataclass
class ConnectivityReport:
    ok: bool
    unreachable: list[Position]


def dungeon_layout(config: DungeonConfig) -> list[LevelDescriptor]:
    """Plan the dungeon as an acyclic, stairs-connected list of level descriptors.

    Runes go one per level: rune-flagged branch termini first, then the deepest
    main levels working upward. The orb sits on the single Zot level, reachable
    only from the deepest main level.
    """
    config.validate()

    branch_termini = [
        f"B{i}:{b.length}" for i, b in enumerate(config.branches, start=1) if b.rune
    ]
    rune_set = set(branch_termini[: config.rune_count])
    depth = config.main_depth
    while len(rune_set) < config.rune_count:
        rune_set.add(f"D:{depth}")   # validate() guarantees enough main levels
        depth -= 1

    zot_id = "Zot:1"
    descriptors: list[LevelDescriptor] = []
    for depth in range(1, config.main_depth + 1):
        level_id = f"D:{depth}"
        ups: list[Optional[str]] = [f"D:{depth - 1}"] if depth > 1 else [None]
        downs: list[str] = []
        if depth < config.main_depth:
            downs.append(f"D:{depth + 1}")
        else:
            downs.append(zot_id)
        for i, branch in enumerate(config.branches, start=1):
            if branch.entry_depth == depth:
                downs.append(f"B{i}:1")
        descriptors.append(LevelDescriptor(
            level_id=level_id, branch="D", depth=depth,
            rune=level_id in rune_set,
            up_links=tuple(ups), down_links=tuple(downs),
        ))

    for i, branch in enumerate(config.branches, start=1):
        for j in range(1, branch.length + 1):
            level_id = f"B{i}:{j}"
            ups = [f"B{i}:{j - 1}"] if j > 1 else [f"D:{branch.entry_depth}"]
            downs = [f"B{i}:{j + 1}"] if j < branch.length else []
            descriptors.append(LevelDescriptor(
                level_id=level_id, branch=f"B{i}", depth=branch.entry_depth + j,
                rune=level_id in rune_set,
                up_links=tuple(ups), down_links=tuple(downs),
            ))

    descriptors.append(LevelDescriptor(
        level_id=zot_id, branch="Zot", depth=config.main_depth + 1,
        orb=True, up_links=(f"D:{config.main_depth}",), down_links=(),
    ))
    return descriptors


def _carve_room(grid: list[list[Tile]], top: int, left: int, height: int, width: int) -> None:
    for r in range(top, top + height):
        for c in range(left, left + width):
            grid[r][c].terrain = Terrain.FLOOR


def _carve_corridor(grid, start: Position, end: Position, rng: RngStream) -> None:
    """L-shaped corridor; orientation of the elbow is a coin flip."""
    horizontal_first = rng.randrange(2) == 0
    r, c = start.row, start.col

    def carve(rr, cc):
        if grid[rr][cc].terrain == Terrain.WALL:
            grid[rr][cc].terrain = Terrain.FLOOR

    if horizontal_first:
        step = 1 if end.col > c else -1
        for cc in range(c, end.col + step, step) if end.col != c else [c]:
            carve(r, cc)
        step = 1 if end.row > r else -1
        for rr in range(r, end.row + step, step) if end.row != r else [r]:
            carve(rr, end.col)
    else:
        step = 1 if end.row > r else -1
        for rr in range(r, end.row + step, step) if end.row != r else [r]:
            carve(rr, c)
        step = 1 if end.col > c else -1
        for cc in range(c, end.col + step, step) if end.col != c else [c]:
            carve(end.row, cc)


def _flood(level: LevelMap, start: Position) -> set[Position]:
    seen = {start}
    frontier = [start]
    while frontier:
        pos = frontier.pop()
        for dr, dc in ((-1, 0), (1, 0), (0, -1), (0, 1)):
            nxt = Position(pos.row + dr, pos.col + dc)
            if nxt not in seen and level.passable_at(nxt):
                seen.add(nxt)
                frontier.append(nxt)
    return seen


def validate_connectivity(level: LevelMap) -> ConnectivityReport:
    """Pure check: all passable tiles mutually 4-connected (stairs included)."""
    passable = level.passable_positions()
    if not passable:
        return ConnectivityReport(ok=False, unreachable=[])
    reached = _flood(level, passable[0])
    unreachable = [p for p in passable if p not in reached]
    return ConnectivityReport(ok=not unreachable, unreachable=unreachable)


def generate_level(seed: int, descriptor: LevelDescriptor, config: DungeonConfig) -> LevelMap:
    """Generate one level's terrain and stairs. Deterministic in (seed, descriptor)."""
    rng = stream_for(seed, "worldgen", descriptor.level_id)
    rows, cols = config.level_rows, config.level_cols
    grid = [[Tile() for _ in range(cols)] for _ in range(rows)]
    level = LevelMap(
        level_id=descriptor.level_id, branch=descriptor.branch,
        depth=descriptor.depth, grid=grid,
    )

    room_target = max(4, (rows * cols) // 72)
    rooms: list[tuple[int, int, int, int]] = []
    attempts = 0
    while len(rooms) < room_target and attempts < room_target * 30:
        attempts += 1
        height = rng.randint(3, min(7, rows - 4))
        width = rng.randint(4, min(9, cols - 4))
        top = rng.randint(1, rows - height - 1)
        left = rng.randint(1, cols - width - 1)
        clash = any(
            top < t + h + 1 and t < top + height + 1 and left < l + w + 1 and l < left + width + 1
            for (t, l, h, w) in rooms
        )
        if not clash:
            rooms.append((top, left, height, width))
            _carve_room(grid, top, left, height, width)
    assert len(rooms) >= 2, "room placement failed on an implausibly tight grid"

    centers = [Position(t + h // 2, l + w // 2) for (t, l, h, w) in rooms]
    for a, b in zip(centers, centers[1:]):
        _carve_corridor(grid, a, b, rng)

    _place_pools(level, rooms, rng)

    floor = [p for p in level.passable_positions() if level.tile(p).terrain == Terrain.FLOOR]
    used: set[Position] = set()

    def take_floor_tile() -> Position:
        while True:
            pos = floor[rng.randrange(len(floor))]
            if pos not in used:
                used.add(pos)
                return pos

    for dest in descriptor.up_links:
        pos = take_floor_tile()
        level.tile(pos).terrain = Terrain.STAIRS_UP
        level.stairs.append(StairLink(pos, dest))
    for dest in descriptor.down_links:
        pos = take_floor_tile()
        level.tile(pos).terrain = Terrain.STAIRS_DOWN
        level.stairs.append(StairLink(pos, dest))

    report = validate_connectivity(level)
    assert report.ok, f"generator produced a disconnected level: {report.unreachable[:4]}"
    return level


def _place_pools(level: LevelMap, rooms, rng: RngStream) -> None:
    """Scatter small water/lava features; impassable ones only where they
    provably keep the level connected (checked, and reverted otherwise)."""
    pool_count = rng.randint(0, max(1, len(rooms) // 3))
    for _ in range(pool_count):
        top, left, height, width = rooms[rng.randrange(len(rooms))]
        pos = Position(top + rng.randrange(height), left + rng.randrange(width))
        terrain = rng.choice((Terrain.SHALLOW_WATER, Terrain.DEEP_WATER, Terrain.LAVA))
        tile = level.tile(pos)
        if tile.terrain != Terrain.FLOOR:
            continue
        tile.terrain = terrain
        if terrain not in PASSABLE and not validate_connectivity(level).ok:
            tile.terrain = Terrain.FLOOR


def populate_level(
    level: LevelMap,
    descriptor: LevelDescriptor,
    config: DungeonConfig,
    catalog: Catalog,
    rng: RngStream,
) -> LevelMap:
    """Place monsters, floor items, and any mandated rune/orb on the level.

    Placement is per-tile Bernoulli, so the expected count is
    density/100 * passable tiles, and everything is deterministic in the
    rng state.
    """
    report = validate_connectivity(level)
    assert report.ok, "populate_level requires a connected level"

    def next_item_id() -> str:
        return f"i_{level.level_id}_{len(level.items) + 1}"

    def next_actor_id() -> str:
        return f"m_{level.level_id}_{len(level.spawns) + 1}"

    open_tiles = [
        p for p in level.passable_positions()
        if level.tile(p).terrain in (Terrain.FLOOR, Terrain.SHALLOW_WATER)
    ]

    # Mandated placements first so they can never be crowded out.
    mandated: list[str] = []
    if descriptor.rune:
        mandated.append("rune")
    if descriptor.orb:
        mandated.append("orb")
    for spec_id in mandated:
        assert open_tiles, "grid too small for a mandated rune/orb"
        pos = open_tiles.pop(rng.randrange(len(open_tiles)))
        iid = next_item_id()
        level.items[iid] = spec_id
        level.tile(pos).items.append(iid)

    species = sorted(catalog.monsters)
    monster_p = config.monster_density / 100.0
    item_p = config.item_density / 100.0
    spawnable = [s.id for s in catalog.spawnable_items()]
    for pos in list(open_tiles):
        tile = level.tile(pos)
        if monster_p > 0 and tile.occupant is None and rng.uniform() < monster_p:
            aid = next_actor_id()
            level.spawns[aid] = species[rng.randrange(len(species))]
            tile.occupant = aid
        if item_p > 0 and spawnable and rng.uniform() < item_p:
            iid = next_item_id()
            level.items[iid] = spawnable[rng.randrange(len(spawnable))]
            tile.items.append(iid)
    return level


def build_dungeon(seed: int, config: DungeonConfig, catalog: Catalog) -> dict[str, LevelMap]:
    """Generate and populate every level of the layout, keyed by level id."""
    levels: dict[str, LevelMap] = {}
    for descriptor in dungeon_layout(config):
        level = generate_level(seed, descriptor, config)
        populate_level(
            level, descriptor, config, catalog,
            stream_for(seed, "populate", descriptor.level_id),
        )
        levels[level.level_id] = level
    return levels
