"""Layout, generation, population, and connectivity."""

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from runecrawl.catalog import default_catalog
from runecrawl.config import BranchSpec, DungeonConfig
from runecrawl.errors import ConfigError
from runecrawl.rng import stream_for
from runecrawl.worldgen import (
    Position,
    Terrain,
    build_dungeon,
    dungeon_layout,
    generate_level,
    populate_level,
    validate_connectivity,
)

from conftest import make_level

CATALOG = default_catalog()


# -- layout -----------------------------------------------------------------

def test_default_layout_counts():
    # 8 main + 2 branches x 2 + Zot = 13 descriptors, 4 rune sites, 1 orb site
    layout = dungeon_layout(DungeonConfig())
    assert len(layout) == 13
    assert sum(1 for d in layout if d.rune) == 4
    assert sum(1 for d in layout if d.orb) == 1
    assert [d.level_id for d in layout if d.orb] == ["Zot:1"]


def test_branch_termini_take_runes_first():
    layout = dungeon_layout(DungeonConfig())
    rune_levels = {d.level_id for d in layout if d.rune}
    assert {"B1:2", "B2:2"} <= rune_levels
    assert rune_levels - {"B1:2", "B2:2"} == {"D:7", "D:8"}


def test_no_branches_puts_runes_on_deepest_main_levels():
    config = DungeonConfig(branches=(), rune_count=3)
    layout = dungeon_layout(config)
    assert {d.level_id for d in layout if d.rune} == {"D:6", "D:7", "D:8"}


def test_rune_count_below_three_is_rejected():
    with pytest.raises(ConfigError):
        dungeon_layout(DungeonConfig(rune_count=2))


def test_orb_level_reachable_only_through_deepest_main_level():
    layout = dungeon_layout(DungeonConfig())
    by_id = {d.level_id: d for d in layout}
    zot = by_id["Zot:1"]
    assert zot.up_links == ("D:8",)
    feeders = [d.level_id for d in layout if "Zot:1" in d.down_links]
    assert feeders == ["D:8"]


def test_layout_is_acyclic_and_connected():
    layout = dungeon_layout(DungeonConfig())
    by_id = {d.level_id: d for d in layout}
    # reachability from D:1 via down links covers everything
    seen = {"D:1"}
    frontier = ["D:1"]
    while frontier:
        node = frontier.pop()
        for nxt in by_id[node].down_links:
            if nxt not in seen:
                seen.add(nxt)
                frontier.append(nxt)
    assert seen == set(by_id)
    # down links always increase depth: no cycles
    for d in layout:
        for nxt in d.down_links:
            assert by_id[nxt].depth > d.depth


def test_rune_conservation_across_configs():
    for rune_count in (3, 5, 9):
        config = DungeonConfig(rune_count=rune_count)
        layout = dungeon_layout(config)
        assert sum(1 for d in layout if d.rune) == rune_count
        assert sum(1 for d in layout if d.orb) == 1


def test_impossible_rune_count_rejected_up_front():
    with pytest.raises(ConfigError):
        DungeonConfig(branches=(), rune_count=15, main_depth=8).validate()


# -- generation ---------------------------------------------------------------

def test_generate_level_is_deterministic():
    config = DungeonConfig()
    descriptor = dungeon_layout(config)[0]
    a = generate_level(seed=1, descriptor=descriptor, config=config)
    b = generate_level(seed=1, descriptor=descriptor, config=config)
    assert [[t.terrain for t in row] for row in a.grid] == \
        [[t.terrain for t in row] for row in b.grid]
    assert a.stairs == b.stairs


def test_generate_level_differs_across_seeds():
    config = DungeonConfig()
    descriptor = dungeon_layout(config)[0]
    a = generate_level(seed=1, descriptor=descriptor, config=config)
    b = generate_level(seed=2, descriptor=descriptor, config=config)
    assert [[t.terrain for t in row] for row in a.grid] != \
        [[t.terrain for t in row] for row in b.grid]


@settings(max_examples=60, deadline=None)
@given(st.integers(min_value=0, max_value=10**9))
def test_generated_levels_are_connected_with_wall_borders(seed):
    config = DungeonConfig()
    for descriptor in dungeon_layout(config)[:2]:
        level = generate_level(seed, descriptor, config)
        assert validate_connectivity(level).ok
        for r in range(level.rows):
            assert not level.grid[r][0].passable
            assert not level.grid[r][level.cols - 1].passable
        for c in range(level.cols):
            assert not level.grid[0][c].passable
            assert not level.grid[level.rows - 1][c].passable


def test_stairs_have_destinations_and_terrain():
    config = DungeonConfig()
    layout = dungeon_layout(config)
    ids = {d.level_id for d in layout}
    for descriptor in layout:
        level = generate_level(3, descriptor, config)
        ups = [s for s in level.stairs
               if level.tile(s.position).terrain == Terrain.STAIRS_UP]
        downs = [s for s in level.stairs
                 if level.tile(s.position).terrain == Terrain.STAIRS_DOWN]
        assert len(ups) == len(descriptor.up_links)
        assert len(downs) == len(descriptor.down_links)
        for link in level.stairs:
            assert link.destination is None or link.destination in ids


# -- population ---------------------------------------------------------------

def _fresh_level(seed=5, index=0, config=None):
    config = config or DungeonConfig()
    descriptor = dungeon_layout(config)[index]
    return generate_level(seed, descriptor, config), descriptor, config


def test_zero_density_leaves_level_empty_except_mandates():
    config = DungeonConfig(monster_density=0, item_density=0)
    layout = dungeon_layout(config)
    rune_descriptor = next(d for d in layout if d.rune)
    level = generate_level(7, rune_descriptor, config)
    populate_level(level, rune_descriptor, config, CATALOG, stream_for(7, "pop"))
    assert not level.spawns
    assert list(level.items.values()) == ["rune"]


def test_orb_level_gets_exactly_one_orb_tile():
    config = DungeonConfig()
    orb_descriptor = dungeon_layout(config)[-1]
    level = generate_level(9, orb_descriptor, config)
    populate_level(level, orb_descriptor, config, CATALOG, stream_for(9, "pop"))
    orb_tiles = [p for p in level.positions()
                 if any(level.items[iid] == "orb" for iid in level.tile(p).items)]
    assert len(orb_tiles) == 1
    assert sum(1 for iid, spec in level.items.items() if spec == "orb") == 1


def test_population_is_deterministic_and_stable():
    level1, descriptor, config = _fresh_level()
    populate_level(level1, descriptor, config, CATALOG, stream_for(42, "pop"))
    count1 = len(level1.spawns)

    level2, _, _ = _fresh_level()
    populate_level(level2, descriptor, config, CATALOG, stream_for(42, "pop"))
    assert len(level2.spawns) == count1
    assert level1.spawns == level2.spawns
    assert level1.items == level2.items


def test_monsters_and_items_land_on_passable_unoccupied_tiles():
    level, descriptor, config = _fresh_level(seed=13)
    populate_level(level, descriptor, config, CATALOG, stream_for(13, "pop"))
    seen_actors = set()
    for pos in level.positions():
        tile = level.tile(pos)
        if tile.occupant is not None:
            assert tile.passable
            assert tile.occupant not in seen_actors
            seen_actors.add(tile.occupant)
        if tile.items:
            assert tile.passable
    assert seen_actors == set(level.spawns)


def test_expected_item_count_tracks_density():
    # expected = density/100 * passable; check the binomial lands in a wide band
    config = DungeonConfig(monster_density=0, item_density=5.0)
    totals = 0
    passables = 0
    for seed in range(20):
        level, descriptor, _ = _fresh_level(seed=seed, config=config)
        populate_level(level, descriptor, config, CATALOG, stream_for(seed, "pop"))
        totals += len(level.items)
        passables += len(level.passable_positions())
    expected = passables * 0.05
    assert 0.6 * expected < totals < 1.4 * expected


def test_hydra_spawn_carries_flag_and_glyph():
    spec = CATALOG.monster("hydra")
    assert spec.glyph == "h"
    assert spec.is_hydra


def test_build_dungeon_conserves_runes_and_orb():
    config = DungeonConfig()
    levels = build_dungeon(11, config, CATALOG)
    rune_items = [iid for level in levels.values()
                  for iid, spec in level.items.items() if spec == "rune"]
    orb_items = [iid for level in levels.values()
                 for iid, spec in level.items.items() if spec == "orb"]
    assert len(rune_items) == config.rune_count
    assert len(orb_items) == 1


# -- connectivity checker -------------------------------------------------------

def test_open_room_is_connected():
    level = make_level(10, 10)
    assert validate_connectivity(level).ok


def test_full_wall_line_splits_the_room():
    walls = [(5, c) for c in range(10)]
    level = make_level(10, 10, walls=walls)
    report = validate_connectivity(level)
    assert not report.ok
    far_side = {p for p in report.unreachable}
    assert far_side == {Position(r, c) for r in range(6, 9) for c in range(1, 9)}
