"""Field of view via symmetric shadowcasting over a Chebyshev disc.

Slopes are exact integer ratios compared by cross-multiplication; no floats.
Tie conventions (shared with any ray-walking check of the same geometry):

- a wall at column c blocks the half-open slope span [c - 1/2, c + 1/2), and
- a sight line that lands exactly half way between two cells resolves toward
  the +row/+col side.

Floor visibility is therefore exactly "the center-to-center line, sampled at
each step of its major axis, meets no wall". Wall tiles light up whenever any
part of them faces the scan, which is intentionally more generous.
"""

from __future__ import annotations

from .worldgen import LevelMap, Position

FOV_RADIUS = 7

# (row_sign, col_sign) per cardinal quadrant; col_sign == 0 means the quadrant
# walks rows as its depth axis. Local minor offsets map to +row/+col globally
# in all four, which is what keeps the tie rule consistent.
_QUADRANTS = ((-1, 0), (1, 0), (0, 1), (0, -1))


def compute_fov(level: LevelMap, origin: Position, radius: int = FOV_RADIUS) -> set[Position]:
    """All positions visible from origin, origin included."""
    visible = {origin}
    orow, ocol = origin.row, origin.col

    for qr, qc in _QUADRANTS:
        if qc == 0:
            def transform(depth: int, col: int) -> tuple[int, int]:
                return orow + qr * depth, ocol + col
        else:
            def transform(depth: int, col: int) -> tuple[int, int]:
                return orow + col, ocol + qc * depth

        # Row frames: (depth, start_num/den, end_num/den, end_open).
        # start edges are always inclusive; an end edge born from a wall's
        # near corner is exclusive.
        stack = [(1, -1, 1, 1, 1, False)]
        while stack:
            depth, sn, sd, en, ed, end_open = stack.pop()
            if depth > radius:
                continue
            min_col = (2 * depth * sn + sd) // (2 * sd)        # round ties up
            max_col = -((-2 * depth * en + ed) // (2 * ed))    # round ties down
            prev_wall = None
            for col in range(min_col, max_col + 1):
                r, c = transform(depth, col)
                inside = 0 <= r < level.rows and 0 <= c < level.cols
                is_wall = (not inside) or level.grid[r][c].opaque
                if is_wall:
                    if inside:
                        visible.add(Position(r, c))
                else:
                    in_lo = col * sd >= depth * sn
                    in_hi = (col * ed < depth * en) if end_open else (col * ed <= depth * en)
                    if in_lo and in_hi:
                        visible.add(Position(r, c))
                if prev_wall is True and not is_wall:
                    sn, sd = 2 * col - 1, 2 * depth
                if prev_wall is False and is_wall:
                    stack.append((depth + 1, sn, sd, 2 * col - 1, 2 * depth, True))
                prev_wall = is_wall
            if prev_wall is False:
                stack.append((depth + 1, sn, sd, en, ed, end_open))
    return visible


def line_of_sight(level: LevelMap, a: Position, b: Position, radius: int = FOV_RADIUS) -> bool:
    """Cheap symmetric sight test between two tiles (used by monster senses).

    Samples the center-to-center line at every major-axis step with the same
    tie convention as compute_fov, so a monster sees the player exactly when
    the player's FOV would include the monster's (non-wall) tile.
    """
    dr, dc = b.row - a.row, b.col - a.col
    if max(abs(dr), abs(dc)) > radius:
        return False
    if abs(dc) >= abs(dr):
        steps, sign = abs(dc), (1 if dc > 0 else -1)
        for k in range(1, steps):
            cc = a.col + sign * k
            rr = a.row + (2 * dr * k + steps) // (2 * steps)
            if level.opaque_at(Position(rr, cc)):
                return False
    else:
        steps, sign = abs(dr), (1 if dr > 0 else -1)
        for k in range(1, steps):
            rr = a.row + sign * k
            cc = a.col + (2 * dc * k + steps) // (2 * steps)
            if level.opaque_at(Position(rr, cc)):
                return False
    return True
