"""Network gateway: agents and spectators over newline-delimited JSON."""

from .client import GatewayClient
from .protocol import WireMessage, decode_line, encode_message
from .server import GatewayServer, ServerConfig

__all__ = [
    "GatewayClient", "GatewayServer", "ServerConfig",
    "WireMessage", "decode_line", "encode_message",
]
