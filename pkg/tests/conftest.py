import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from runecrawl.catalog import default_catalog
from runecrawl.scenario import parse_scenario
from runecrawl.worldgen import LevelMap, Position, Terrain, Tile


@pytest.fixture(scope="session")
def catalog():
    return default_catalog()


def make_level(rows, cols, walls=(), level_id="test:1", shifting=False):
    """Bare rectangular level: border walls, floor inside, extra walls where told."""
    grid = [[Tile(Terrain.WALL) for _ in range(cols)] for _ in range(rows)]
    for r in range(1, rows - 1):
        for c in range(1, cols - 1):
            grid[r][c] = Tile(Terrain.FLOOR)
    for r, c in walls:
        grid[r][c] = Tile(Terrain.WALL)
    return LevelMap(level_id=level_id, branch="test", depth=1,
                    grid=grid, shifting=shifting)


def room_scenario(rows, cols, entries, win="kill_all", turn_limit=None,
                  legend=(), name="arena", seed=1):
    """Scenario text for a rows x cols room with glyphs at given positions."""
    grid = [["#"] * cols for _ in range(rows)]
    for r in range(1, rows - 1):
        for c in range(1, cols - 1):
            grid[r][c] = "."
    for (r, c), glyph in entries.items():
        grid[r][c] = glyph
    lines = [f"name: {name}", f"seed: {seed}"]
    if turn_limit is not None:
        lines.append(f"turn_limit: {turn_limit}")
    lines.append(f"win: {win}")
    lines.append("map:")
    lines.extend("".join(row) for row in grid)
    if legend:
        lines.append("legend:")
        lines.extend(f"{glyph} = {entity}" for glyph, entity in legend)
    return "\n".join(lines) + "\n"


def make_scenario_game(rows, cols, entries, seed=1, **kwargs):
    from runecrawl.scenario import instantiate_scenario
    spec = parse_scenario(room_scenario(rows, cols, entries, **kwargs))
    return instantiate_scenario(spec, seed=seed)
