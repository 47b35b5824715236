"""Wire format: one JSON object per line, UTF-8, fields {type, seq, payload}.

Types: hello, ack, state, action, macro_progress, chat, error, game_over.
Client seq numbers must be strictly increasing per session; the server keeps
its own outbound counter. Anything unparseable yields an error message, never
a crash.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from ..errors import ProtocolError

MESSAGE_TYPES = (
    "hello", "ack", "state", "action", "macro_progress", "chat", "error", "game_over",
)

MAX_LINE_BYTES = 1 << 20


@dataclass
class WireMessage:
    type: str
    seq: int
    payload: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"type": self.type, "seq": self.seq, "payload": self.payload}


def encode_message(message: WireMessage) -> bytes:
    """Canonical single-line encoding (sorted keys, tight separators)."""
    text = json.dumps(message.to_dict(), sort_keys=True, separators=(",", ":"))
    return text.encode("utf-8") + b"\n"


def decode_line(line: bytes) -> WireMessage:
    if len(line) > MAX_LINE_BYTES:
        raise ProtocolError("line-too-long", f"line exceeds {MAX_LINE_BYTES} bytes")
    try:
        data = json.loads(line.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise ProtocolError("bad-json", f"unparseable line: {exc}") from None
    if not isinstance(data, dict):
        raise ProtocolError("bad-json", "message must be a JSON object")
    msg_type = data.get("type")
    if msg_type not in MESSAGE_TYPES:
        raise ProtocolError("unknown-type", f"unknown message type {msg_type!r}")
    seq = data.get("seq")
    if not isinstance(seq, int):
        raise ProtocolError("bad-seq", "seq must be an integer")
    payload = data.get("payload", {})
    if not isinstance(payload, dict):
        raise ProtocolError("bad-payload", "payload must be an object")
    return WireMessage(type=msg_type, seq=seq, payload=payload)
