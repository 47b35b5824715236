"""Monster and item catalogs.

The built-in catalog is small on purpose: enough species and gear to exercise
every combat rule (including the hydra head rule and weapon brands) without
hauling in content for its own sake. Catalogs can also be loaded from a
key-value text file; the committed ``configs/default_catalog.cfg`` mirrors the
built-ins exactly.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from .errors import ConfigError

WEAPON_CLASSES = ("bladed", "blunt")
BRANDS = ("fire", "frost", "venom")
ITEM_CATEGORIES = ("weapon", "potion", "scroll", "rune", "orb")


@dataclass(frozen=True)
class MonsterSpec:
    id: str
    glyph: str
    max_hp: int
    accuracy: int
    evasion: int
    base_damage: int
    speed_aut: int
    xp_value: int
    flags: frozenset = frozenset()
    description: str = ""

    def __post_init__(self):
        if len(self.glyph) != 1:
            raise ConfigError(f"monster {self.id}: glyph must be one character")
        if self.speed_aut < 1:
            raise ConfigError(f"monster {self.id}: speed_aut must be >= 1")
        if self.max_hp < 1 or self.base_damage < 1 or self.xp_value < 1:
            raise ConfigError(f"monster {self.id}: hp/damage/xp must be positive")

    @property
    def is_hydra(self) -> bool:
        return "hydra" in self.flags


@dataclass(frozen=True)
class ItemSpec:
    id: str
    category: str
    weapon_class: Optional[str] = None
    brand: Optional[str] = None
    base_damage: Optional[int] = None
    description: str = ""

    def __post_init__(self):
        if self.category not in ITEM_CATEGORIES:
            raise ConfigError(f"item {self.id}: unknown category {self.category!r}")
        is_weapon = self.category == "weapon"
        if is_weapon != (self.weapon_class is not None and self.base_damage is not None):
            raise ConfigError(
                f"item {self.id}: weapon_class/base_damage present iff category=weapon"
            )
        if not is_weapon and self.brand is not None:
            raise ConfigError(f"item {self.id}: brand only allowed on weapons")
        if self.weapon_class is not None and self.weapon_class not in WEAPON_CLASSES:
            raise ConfigError(f"item {self.id}: unknown weapon class {self.weapon_class!r}")
        if self.brand is not None and self.brand not in BRANDS:
            raise ConfigError(f"item {self.id}: unknown brand {self.brand!r}")

    @property
    def takes_slot(self) -> bool:
        """Runes and the orb ride along without occupying an inventory slot."""
        return self.category not in ("rune", "orb")


@dataclass
class Catalog:
    monsters: dict[str, MonsterSpec] = field(default_factory=dict)
    items: dict[str, ItemSpec] = field(default_factory=dict)

    def monster(self, monster_id: str) -> MonsterSpec:
        try:
            return self.monsters[monster_id]
        except KeyError:
            raise ConfigError(f"unknown monster id {monster_id!r}") from None

    def item(self, item_id: str) -> ItemSpec:
        try:
            return self.items[item_id]
        except KeyError:
            raise ConfigError(f"unknown item id {item_id!r}") from None

    def monster_by_glyph(self, glyph: str) -> Optional[MonsterSpec]:
        for spec in self.monsters.values():
            if spec.glyph == glyph:
                return spec
        return None

    def add_monster(self, spec: MonsterSpec) -> None:
        for other in self.monsters.values():
            if other.glyph == spec.glyph:
                raise ConfigError(
                    f"monster {spec.id}: glyph {spec.glyph!r} already used by {other.id}"
                )
        self.monsters[spec.id] = spec

    def add_item(self, spec: ItemSpec) -> None:
        self.items[spec.id] = spec

    def spawnable_items(self) -> list[ItemSpec]:
        """Items eligible for random floor placement (never runes or the orb)."""
        return [s for s in self.items.values() if s.category in ("weapon", "potion", "scroll")]


def default_catalog() -> Catalog:
    cat = Catalog()
    for spec in (
        MonsterSpec("rat", "r", 4, 2, 10, 2, 8, 2, description="A scrawny dungeon rat."),
        MonsterSpec("goblin", "g", 7, 4, 9, 3, 10, 4, description="A sneering goblin."),
        MonsterSpec("orc", "o", 12, 6, 8, 5, 10, 8, description="A surly orc warrior."),
        MonsterSpec("snake", "s", 8, 7, 12, 3, 8, 6, description="A quick venomous snake."),
        MonsterSpec("ogre", "O", 22, 7, 5, 9, 12, 16, description="A lumbering ogre."),
        MonsterSpec(
            "hydra", "h", 18, 8, 6, 4, 10, 24,
            flags=frozenset({"hydra"}),
            description="A many-headed serpent; severed heads grow back doubled.",
        ),
        MonsterSpec("dragon", "D", 30, 10, 7, 11, 10, 40, description="A fire-breathing dragon."),
        MonsterSpec("lich", "L", 26, 12, 10, 8, 10, 48, description="A desiccated undead sorcerer."),
    ):
        cat.add_monster(spec)

    for spec in (
        ItemSpec("short_sword", "weapon", "bladed", None, 4, "A light bladed weapon."),
        ItemSpec("long_sword", "weapon", "bladed", None, 6, "A heavier bladed weapon."),
        ItemSpec("axe", "weapon", "bladed", None, 7, "A broad-bladed axe."),
        ItemSpec("flame_sword", "weapon", "bladed", "fire", 6, "A sword wreathed in flame."),
        ItemSpec("venom_dagger", "weapon", "bladed", "venom", 3, "A dagger dripping poison."),
        ItemSpec("mace", "weapon", "blunt", None, 6, "A solid blunt mace."),
        ItemSpec("club", "weapon", "blunt", None, 4, "A crude wooden club."),
        ItemSpec("frost_mace", "weapon", "blunt", "frost", 5, "A mace rimed with frost."),
        ItemSpec("potion_curing", "potion", description="A potion that mends wounds."),
        ItemSpec("scroll_blinking", "scroll", description="A scroll of short-range teleport."),
        ItemSpec("rune", "rune", description="A talisman etched with a glowing rune."),
        ItemSpec("orb", "orb", description="The prize at the bottom of the dungeon."),
    ):
        cat.add_item(spec)
    return cat


def parse_catalog(text: str) -> Catalog:
    """Parse the catalog file format.

    One entry per line: ``monster <id> key=value ...`` or ``item <id> key=value ...``.
    Blank lines and ``#`` comments are ignored. ``flags`` and ``description``
    use ``|`` for embedded spaces.
    """
    cat = Catalog()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) < 2 or parts[0] not in ("monster", "item"):
            raise ConfigError(f"catalog line {lineno}: expected 'monster <id> ...' or 'item <id> ...'")
        kind, entry_id = parts[0], parts[1]
        kv = {}
        for token in parts[2:]:
            if "=" not in token:
                raise ConfigError(f"catalog line {lineno}: expected key=value, got {token!r}")
            key, value = token.split("=", 1)
            kv[key] = value.replace("|", " ")
        try:
            if kind == "monster":
                cat.add_monster(MonsterSpec(
                    id=entry_id,
                    glyph=kv.pop("glyph"),
                    max_hp=int(kv.pop("hp")),
                    accuracy=int(kv.pop("accuracy")),
                    evasion=int(kv.pop("evasion")),
                    base_damage=int(kv.pop("damage")),
                    speed_aut=int(kv.pop("speed")),
                    xp_value=int(kv.pop("xp")),
                    flags=frozenset(kv.pop("flags").split(",")) if "flags" in kv else frozenset(),
                    description=kv.pop("description", ""),
                ))
            else:
                cat.add_item(ItemSpec(
                    id=entry_id,
                    category=kv.pop("category"),
                    weapon_class=kv.pop("class", None),
                    brand=kv.pop("brand", None),
                    base_damage=int(kv.pop("damage")) if "damage" in kv else None,
                    description=kv.pop("description", ""),
                ))
        except KeyError as exc:
            raise ConfigError(f"catalog line {lineno}: missing field {exc}") from None
        if kv:
            raise ConfigError(f"catalog line {lineno}: unknown fields {sorted(kv)}")
    return cat


def render_catalog(cat: Catalog) -> str:
    """Inverse of parse_catalog for the built-in fields."""
    lines = []
    for m in cat.monsters.values():
        flags = f" flags={','.join(sorted(m.flags))}" if m.flags else ""
        desc = f" description={m.description.replace(' ', '|')}" if m.description else ""
        lines.append(
            f"monster {m.id} glyph={m.glyph} hp={m.max_hp} accuracy={m.accuracy} "
            f"evasion={m.evasion} damage={m.base_damage} speed={m.speed_aut} "
            f"xp={m.xp_value}{flags}{desc}"
        )
    for i in cat.items.values():
        extra = ""
        if i.weapon_class:
            extra += f" class={i.weapon_class}"
        if i.brand:
            extra += f" brand={i.brand}"
        if i.base_damage is not None:
            extra += f" damage={i.base_damage}"
        desc = f" description={i.description.replace(' ', '|')}" if i.description else ""
        lines.append(f"item {i.id} category={i.category}{extra}{desc}")
    return "\n".join(lines) + "\n"
