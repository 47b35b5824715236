"""Blocking socket client for the gateway, used by the harness and tests."""

from __future__ import annotations

import socket
from typing import Optional

from ..actions import Action
from ..engine import ObservedState
from ..errors import ProtocolError
from .protocol import WireMessage, decode_line, encode_message


class GatewayClient:
    def __init__(self, host: str, port: int, timeout: float = 30.0):
        self._sock = socket.create_connection((host, port), timeout=timeout)
        self._file = self._sock.makefile("rb")
        self._seq = 0
        self.session_id: Optional[str] = None
        self.game_id: Optional[str] = None

    def close(self) -> None:
        try:
            self._file.close()
        finally:
            self._sock.close()

    def __enter__(self) -> "GatewayClient":
        return self

    def __exit__(self, *exc) -> None:
        self.close()

    # -- raw I/O -------------------------------------------------------------

    def send(self, msg_type: str, payload: dict) -> None:
        self._seq += 1
        self._sock.sendall(encode_message(WireMessage(msg_type, self._seq, payload)))

    def send_raw(self, line: bytes) -> None:
        self._sock.sendall(line)

    def recv(self) -> WireMessage:
        line = self._file.readline()
        if not line:
            raise ProtocolError("closed", "server closed the connection")
        return decode_line(line)

    # -- handshake -----------------------------------------------------------

    def hello_agent(self, seed: int, agent: str = "remote",
                    scenario: Optional[str] = None,
                    scenario_text: Optional[str] = None,
                    config_text: Optional[str] = None,
                    turn_limit: Optional[int] = None) -> ObservedState:
        payload: dict = {"role": "agent", "seed": seed, "agent": agent}
        if scenario_text is not None:
            payload["scenario_text"] = scenario_text
        elif scenario is not None:
            payload["scenario"] = scenario
        if config_text is not None:
            payload["config"] = config_text
        if turn_limit is not None:
            payload["turn_limit"] = turn_limit
        self.send("hello", payload)
        ack = self.recv()
        if ack.type == "error":
            raise ProtocolError(ack.payload.get("code", "error"),
                                ack.payload.get("message", "hello rejected"))
        assert ack.type == "ack", f"expected ack, got {ack.type}"
        self.session_id = ack.payload["session"]
        self.game_id = ack.payload["game"]
        state = self.recv()
        assert state.type == "state"
        return ObservedState.from_dict(state.payload["observation"])

    def hello_spectator(self, game_id: str) -> ObservedState:
        self.send("hello", {"role": "spectator", "game": game_id})
        ack = self.recv()
        if ack.type == "error":
            raise ProtocolError(ack.payload.get("code", "error"),
                                ack.payload.get("message", "hello rejected"))
        self.session_id = ack.payload["session"]
        self.game_id = ack.payload["game"]
        state = self.recv()
        assert state.type == "state"
        return ObservedState.from_dict(state.payload["observation"])

    # -- play ----------------------------------------------------------------

    def act(self, action: Action) -> dict:
        """Send one action; collect replies through the state message.

        Returns {observation, events, status, macro_progress, game_over, error}.
        """
        self.send("action", {"action": action.to_dict()})
        out: dict = {"macro_progress": [], "game_over": None, "error": None,
                     "observation": None, "events": [], "status": None}
        awaiting_game_over = False
        while True:
            message = self.recv()
            if message.type == "macro_progress":
                out["macro_progress"].append(message.payload)
            elif message.type == "state":
                out["observation"] = ObservedState.from_dict(
                    message.payload["observation"])
                out["events"] = message.payload["events"]
                out["status"] = message.payload["status"]
                if not message.payload.get("final", False):
                    return out
                awaiting_game_over = True   # a game_over push follows
            elif message.type == "game_over":
                out["game_over"] = message.payload
                if out["observation"] is not None or not awaiting_game_over:
                    return out
            elif message.type == "chat":
                continue
            elif message.type == "error":
                out["error"] = message.payload
                return out
            else:
                raise ProtocolError("unknown-type", f"unexpected {message.type}")

    def chat(self, text: str) -> None:
        self.send("chat", {"text": text})
