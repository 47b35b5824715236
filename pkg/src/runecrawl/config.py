"""Dungeon configuration and its key-value file format.

The file format is one ``key: value`` pair per line, ``#`` comments, and a
repeatable ``branch: <entry_depth> <length> <rune|norune>`` line. The
committed ``configs/default_dungeon.cfg`` parses to ``DungeonConfig()``.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field

from .errors import ConfigError

MIN_RUNES = 3
MAX_RUNES = 15


@dataclass(frozen=True)
class BranchSpec:
    entry_depth: int
    length: int
    rune: bool


@dataclass(frozen=True)
class DungeonConfig:
    main_depth: int = 8
    branches: tuple[BranchSpec, ...] = (
        BranchSpec(entry_depth=3, length=2, rune=True),
        BranchSpec(entry_depth=5, length=2, rune=True),
    )
    rune_count: int = 4
    level_rows: int = 24
    level_cols: int = 36
    monster_density: float = 2.5   # expected monsters per 100 passable tiles
    item_density: float = 5.0      # expected items per 100 passable tiles

    def validate(self) -> None:
        if self.main_depth < 1:
            raise ConfigError("main_depth must be positive")
        if not MIN_RUNES <= self.rune_count <= MAX_RUNES:
            raise ConfigError(
                f"rune_count must be in [{MIN_RUNES}, {MAX_RUNES}], got {self.rune_count}"
            )
        if self.level_rows < 8 or self.level_cols < 8:
            raise ConfigError("levels must be at least 8x8")
        if self.monster_density < 0 or self.item_density < 0:
            raise ConfigError("densities must be non-negative")
        for branch in self.branches:
            if not 1 <= branch.entry_depth <= self.main_depth:
                raise ConfigError(
                    f"branch entry depth {branch.entry_depth} outside main dungeon"
                )
            if branch.length < 1:
                raise ConfigError("branch length must be positive")
        rune_sites = sum(1 for b in self.branches if b.rune) + self.main_depth
        if self.rune_count > rune_sites:
            raise ConfigError(
                f"rune_count {self.rune_count} exceeds available rune sites {rune_sites}"
            )

    def content_hash(self) -> str:
        blob = json.dumps(
            {
                "main_depth": self.main_depth,
                "branches": [[b.entry_depth, b.length, b.rune] for b in self.branches],
                "rune_count": self.rune_count,
                "level_rows": self.level_rows,
                "level_cols": self.level_cols,
                "monster_density": self.monster_density,
                "item_density": self.item_density,
            },
            sort_keys=True,
        )
        return hashlib.sha256(blob.encode()).hexdigest()[:16]


_SCALAR_KEYS = {
    "main_depth": int,
    "rune_count": int,
    "level_rows": int,
    "level_cols": int,
    "monster_density": float,
    "item_density": float,
}


def parse_config(text: str) -> DungeonConfig:
    values: dict = {}
    branches: list[BranchSpec] = []
    saw_branch_key = False
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if ":" not in line:
            raise ConfigError(f"config line {lineno}: expected 'key: value'")
        key, value = (part.strip() for part in line.split(":", 1))
        if key == "branch":
            saw_branch_key = True
            parts = value.split()
            if len(parts) != 3 or parts[2] not in ("rune", "norune"):
                raise ConfigError(
                    f"config line {lineno}: branch wants '<entry> <length> <rune|norune>'"
                )
            branches.append(BranchSpec(int(parts[0]), int(parts[1]), parts[2] == "rune"))
        elif key in _SCALAR_KEYS:
            try:
                values[key] = _SCALAR_KEYS[key](value)
            except ValueError:
                raise ConfigError(f"config line {lineno}: bad value for {key}: {value!r}") from None
        else:
            raise ConfigError(f"config line {lineno}: unknown key {key!r}")
    if saw_branch_key:
        values["branches"] = tuple(branches)
    config = DungeonConfig(**values)
    config.validate()
    return config


def render_config(config: DungeonConfig) -> str:
    lines = [
        f"main_depth: {config.main_depth}",
        f"rune_count: {config.rune_count}",
        f"level_rows: {config.level_rows}",
        f"level_cols: {config.level_cols}",
        f"monster_density: {config.monster_density}",
        f"item_density: {config.item_density}",
    ]
    for b in config.branches:
        lines.append(f"branch: {b.entry_depth} {b.length} {'rune' if b.rune else 'norune'}")
    return "\n".join(lines) + "\n"


def load_config(path) -> DungeonConfig:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_config(fh.read())
