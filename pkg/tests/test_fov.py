"""Shadowcasting against the spec'd examples and the ray-cast oracle."""

import random

from hypothesis import given, settings
from hypothesis import strategies as st

from runecrawl.fov import compute_fov, line_of_sight
from runecrawl.worldgen import Position

from conftest import make_level
from oracles import bresenham_fov


def random_wall_map(seed, rows=21, cols=21, p=0.13):
    """Interior walls only (the border stays wall via make_level)."""
    rng = random.Random(seed)
    origin = (rows // 2, cols // 2)
    walls = [(r, c) for r in range(1, rows - 1) for c in range(1, cols - 1)
             if (r, c) != origin and rng.random() < p]
    return make_level(rows, cols, walls=walls), Position(*origin)


def test_open_room_sees_the_full_chebyshev_disc():
    level = make_level(32, 32)
    fov = compute_fov(level, Position(15, 15), radius=7)
    assert len(fov) == 15 * 15
    assert fov == {Position(15 + dr, 15 + dc)
                   for dr in range(-7, 8) for dc in range(-7, 8)}


def test_fully_enclosed_origin_sees_nine_tiles():
    walls = [(15 + dr, 15 + dc) for dr in (-1, 0, 1) for dc in (-1, 0, 1)
             if (dr, dc) != (0, 0)]
    level = make_level(32, 32, walls=walls)
    fov = compute_fov(level, Position(15, 15), radius=7)
    assert len(fov) == 9


def test_single_wall_casts_a_shadow():
    level = make_level(21, 21, walls=[(10, 12)])
    fov = compute_fov(level, Position(10, 10), radius=7)
    assert Position(10, 12) in fov          # the wall itself is lit
    assert Position(10, 13) not in fov      # the tile straight behind is not
    assert Position(10, 11) in fov


def test_origin_always_included_and_radius_respected():
    level, origin = random_wall_map(99)
    fov = compute_fov(level, origin, radius=7)
    assert origin in fov
    assert all(origin.chebyshev(p) <= 7 for p in fov)


def test_matches_ray_oracle_on_100_maps_floor_exact():
    total = disagreements = floor_disagreements = 0
    for seed in range(100):
        level, origin = random_wall_map(seed)
        fov = compute_fov(level, origin, radius=7)
        oracle = bresenham_fov(
            lambda r, c: level.grid[r][c].opaque,
            level.rows, level.cols, (origin.row, origin.col), radius=7)
        for r in range(level.rows):
            for c in range(level.cols):
                total += 1
                mine = Position(r, c) in fov
                theirs = (r, c) in oracle
                if mine != theirs:
                    disagreements += 1
                    if not level.grid[r][c].opaque:
                        floor_disagreements += 1
    assert floor_disagreements == 0
    assert disagreements / total < 0.01, f"{disagreements}/{total}"


@settings(max_examples=40, deadline=None)
@given(st.integers(min_value=0, max_value=10**9))
def test_floor_visibility_is_symmetric(seed):
    level, origin = random_wall_map(seed, rows=15, cols=15)
    fov = compute_fov(level, origin, radius=7)
    for pos in fov:
        if level.grid[pos.row][pos.col].opaque or pos == origin:
            continue
        back = compute_fov(level, pos, radius=7)
        assert origin in back, (origin, pos)


@settings(max_examples=30, deadline=None)
@given(st.integers(min_value=0, max_value=10**9))
def test_line_of_sight_agrees_with_fov_on_floors(seed):
    level, origin = random_wall_map(seed, rows=15, cols=15)
    fov = compute_fov(level, origin, radius=7)
    for r in range(1, level.rows - 1):
        for c in range(1, level.cols - 1):
            pos = Position(r, c)
            if level.grid[r][c].opaque:
                continue
            assert line_of_sight(level, origin, pos) == (pos in fov), pos


def test_walls_block_but_are_visible_when_their_face_is_lit():
    # a wall segment right next to the origin: the near faces show up
    level = make_level(21, 21, walls=[(8, 10), (9, 10), (10, 10)])
    fov = compute_fov(level, Position(10, 8), radius=7)
    assert Position(10, 10) in fov
    assert Position(9, 10) in fov
    assert Position(10, 12) not in fov
