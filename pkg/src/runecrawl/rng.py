"""Counter-based deterministic random streams.

Every draw is a pure function of (seed, stream_id, counter), so sequences
are bit-identical across platforms and runs, and distinct stream ids never
interact: drawing from one stream does not advance any other.

The output function is the SplitMix64 finalizer applied to a per-stream key
plus a golden-ratio-weighted counter. Constants are the published SplitMix64
values.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence, TypeVar

_MASK64 = (1 << 64) - 1
_GAMMA = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB

T = TypeVar("T")


def _mix64(z: int) -> int:
    z &= _MASK64
    z = ((z ^ (z >> 30)) * _MIX1) & _MASK64
    z = ((z ^ (z >> 27)) * _MIX2) & _MASK64
    return z ^ (z >> 31)


def stream_id_for(*labels: object) -> int:
    """Derive a 64-bit stream id from a sequence of labels (FNV-1a over utf-8)."""
    h = 0xCBF29CE484222325
    for label in labels:
        for byte in str(label).encode("utf-8") + b"\x1f":
            h = ((h ^ byte) * 0x100000001B3) & _MASK64
    return h


@dataclass
class RngStream:
    """One independent random stream identified by (seed, stream_id)."""

    seed: int
    stream_id: int = 0
    counter: int = 0
    _key: int = field(init=False, repr=False)

    def __post_init__(self):
        self.seed &= _MASK64
        self.stream_id &= _MASK64
        self._key = _mix64(self.seed ^ _mix64(self.stream_id + _GAMMA))

    def next_u64(self) -> int:
        value = _mix64(self._key + self.counter * _GAMMA)
        self.counter += 1
        return value

    def uniform(self) -> float:
        """Float in [0, 1) with 53 bits of precision."""
        return (self.next_u64() >> 11) * (2.0 ** -53)

    def randrange(self, n: int) -> int:
        """Integer in [0, n). Uses rejection sampling, so unbiased for any n."""
        if n <= 0:
            raise ValueError("randrange() bound must be positive")
        limit = _MASK64 - (_MASK64 + 1) % n
        while True:
            value = self.next_u64()
            if value <= limit:
                return value % n

    def randint(self, lo: int, hi: int) -> int:
        """Integer in [lo, hi], inclusive."""
        if hi < lo:
            raise ValueError("empty range")
        return lo + self.randrange(hi - lo + 1)

    def choice(self, seq: Sequence[T]) -> T:
        if not seq:
            raise ValueError("choice from empty sequence")
        return seq[self.randrange(len(seq))]

    def shuffle(self, items: list) -> None:
        """Fisher-Yates in place."""
        for i in range(len(items) - 1, 0, -1):
            j = self.randrange(i + 1)
            items[i], items[j] = items[j], items[i]

    def spawn(self, *labels: object) -> "RngStream":
        """Child stream keyed off this stream's id; independent of the parent."""
        return RngStream(self.seed, stream_id_for(self.stream_id, *labels))


def stream_for(seed: int, *labels: object) -> RngStream:
    """Stream for a named subsystem, e.g. stream_for(seed, 'worldgen', 'D:1')."""
    return RngStream(seed, stream_id_for(*labels))
