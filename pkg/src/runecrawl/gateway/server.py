"""The gateway service: one asyncio task per connection, one game per agent.

Each game is driven solely by its agent's connection task, so engine steps
are naturally serialized per game while many games run concurrently.
Spectators get fire-and-forget copies of the agent's view; a slow or dead
spectator never stalls the agent.
"""

from __future__ import annotations

import asyncio
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Optional

from ..actions import Action
from ..catalog import Catalog, default_catalog
from ..config import DungeonConfig
from ..engine import GameState, GameStatus, observe, step
from ..errors import MacroError, ProtocolError, TerminalStateError
from ..macros import expand_macro, macro_interrupted
from ..metrics import episode_metrics
from ..scenario import BUILTIN_SCENARIOS, instantiate_scenario, parse_scenario
from .protocol import WireMessage, decode_line, encode_message


@dataclass
class ServerConfig:
    bind: str = "127.0.0.1"
    port: int = 0
    max_sessions: int = 256
    scenario_dir: Optional[str] = None
    log_dir: Optional[str] = None
    time_fn: Callable[[], float] = time.perf_counter


@dataclass
class Session:
    sid: str
    role: str
    writer: asyncio.StreamWriter
    game_id: Optional[str] = None
    out_seq: int = 0
    last_in_seq: int = 0

    def next_seq(self) -> int:
        self.out_seq += 1
        return self.out_seq


@dataclass
class GameSession:
    game_id: str
    game: GameState
    agent: Session
    started: float
    spectators: dict[str, Session] = field(default_factory=dict)
    finished: bool = False


class GatewayServer:
    def __init__(self, config: Optional[ServerConfig] = None,
                 catalog: Optional[Catalog] = None):
        self.config = config or ServerConfig()
        self.catalog = catalog or default_catalog()
        self.sessions: dict[str, Session] = {}
        self.games: dict[str, GameSession] = {}
        self._session_counter = 0
        self._game_counter = 0
        self._server: Optional[asyncio.base_events.Server] = None

    # -- lifecycle -----------------------------------------------------------

    async def start(self) -> None:
        self._server = await asyncio.start_server(
            self._handle_connection, self.config.bind, self.config.port)
        sock = self._server.sockets[0]
        self.port = sock.getsockname()[1]

    async def stop(self) -> None:
        if self._server is not None:
            self._server.close()
            await self._server.wait_closed()
        for session in list(self.sessions.values()):
            session.writer.close()

    async def serve_forever(self) -> None:
        await self.start()
        async with self._server:
            await self._server.serve_forever()

    # -- plumbing ------------------------------------------------------------

    async def _send(self, session: Session, msg_type: str, payload: dict) -> None:
        message = WireMessage(msg_type, session.next_seq(), payload)
        session.writer.write(encode_message(message))
        await session.writer.drain()

    def _send_nowait(self, session: Session, msg_type: str, payload: dict) -> bool:
        """Best-effort delivery for spectators; False drops the spectator."""
        try:
            message = WireMessage(msg_type, session.next_seq(), payload)
            session.writer.write(encode_message(message))
            return True
        except Exception:
            return False

    def _broadcast(self, game_session: GameSession, msg_type: str, payload: dict) -> None:
        dead = []
        for sid, spectator in game_session.spectators.items():
            if not self._send_nowait(spectator, msg_type, payload):
                dead.append(sid)
        for sid in dead:
            game_session.spectators.pop(sid, None)

    # -- game setup ----------------------------------------------------------

    def _load_scenario_text(self, name: str) -> Optional[str]:
        if self.config.scenario_dir is not None:
            path = Path(self.config.scenario_dir) / f"{name}.scen"
            if path.is_file():
                return path.read_text(encoding="utf-8")
        return BUILTIN_SCENARIOS.get(name)

    def _create_game(self, payload: dict, agent_session: Session) -> GameSession:
        seed = payload.get("seed", 0)
        if not isinstance(seed, int):
            raise ProtocolError("bad-hello", "seed must be an integer")
        agent_name = str(payload.get("agent", "remote"))

        if "scenario_text" in payload:
            spec = parse_scenario(str(payload["scenario_text"]), self.catalog)
            game = instantiate_scenario(spec, seed, self.catalog, agent_name)
        elif "scenario" in payload:
            text = self._load_scenario_text(str(payload["scenario"]))
            if text is None:
                raise ProtocolError("bad-hello", f"unknown scenario {payload['scenario']!r}")
            spec = parse_scenario(text, self.catalog)
            game = instantiate_scenario(spec, seed, self.catalog, agent_name)
        else:
            from ..config import parse_config
            if "config" in payload:
                config = parse_config(str(payload["config"]))
            else:
                config = DungeonConfig()
            from ..engine import new_game
            game = new_game(seed, config, self.catalog, agent_name)

        if "turn_limit" in payload:
            limit = payload["turn_limit"]
            if not isinstance(limit, int) or limit < 1:
                raise ProtocolError("bad-hello", "turn_limit must be a positive integer")
            game.turn_limit = limit

        self._game_counter += 1
        game_id = f"g{self._game_counter}"
        game_session = GameSession(
            game_id=game_id, game=game, agent=agent_session,
            started=self.config.time_fn(),
        )
        self.games[game_id] = game_session
        return game_session

    def _finish_game(self, game_session: GameSession, outcome: str) -> dict:
        game = game_session.game
        wall = self.config.time_fn() - game_session.started
        game.history.seal(outcome, wall)
        report = episode_metrics(game.history)
        log_path = None
        if self.config.log_dir is not None:
            path = Path(self.config.log_dir)
            path.mkdir(parents=True, exist_ok=True)
            log_path = path / f"{game_session.game_id}.jsonl"
            log_path.write_text(game.history.to_jsonl(), encoding="utf-8")
        game_session.finished = True
        return {
            "status": game.status,
            "outcome": outcome,
            "report": report.to_dict(),
            "log_hash": game.history.content_hash(),
            "log_path": str(log_path) if log_path else None,
        }

    # -- connection handling ---------------------------------------------------

    async def _handle_connection(self, reader: asyncio.StreamReader,
                                 writer: asyncio.StreamWriter) -> None:
        self._session_counter += 1
        sid = f"s{self._session_counter}"
        session = Session(sid=sid, role="", writer=writer)

        async def send_error(code: str, text: str) -> None:
            try:
                await self._send(session, "error", {"code": code, "message": text})
            except Exception:
                pass

        try:
            if len(self.sessions) >= self.config.max_sessions:
                await send_error("session-limit", "server is full")
                return
            line = await reader.readline()
            if not line:
                return
            try:
                hello = decode_line(line)
            except ProtocolError as exc:
                await send_error(exc.code, str(exc))
                return
            if hello.type != "hello":
                await send_error("bad-hello", "first message must be hello")
                return
            session.last_in_seq = hello.seq

            role = hello.payload.get("role", "agent")
            if role not in ("agent", "spectator"):
                await send_error("bad-hello", f"unknown role {role!r}")
                return
            session.role = role
            self.sessions[sid] = session

            if role == "agent":
                try:
                    game_session = self._create_game(hello.payload, session)
                except ProtocolError as exc:
                    await send_error(exc.code, str(exc))
                    return
                except Exception as exc:
                    await send_error("bad-hello", f"could not create game: {exc}")
                    return
                session.game_id = game_session.game_id
                await self._send(session, "ack", {
                    "session": sid, "game": game_session.game_id, "role": role,
                })
                observation = observe(game_session.game)
                await self._send(session, "state", {
                    "observation": observation.to_dict(),
                    "events": [], "status": game_session.game.status,
                })
            else:
                game_id = hello.payload.get("game")
                game_session = self.games.get(game_id)
                if game_session is None:
                    await send_error("bad-hello", f"no such game {game_id!r}")
                    return
                session.game_id = game_id
                game_session.spectators[sid] = session
                await self._send(session, "ack", {
                    "session": sid, "game": game_id, "role": role,
                })
                observation = observe(game_session.game)
                await self._send(session, "state", {
                    "observation": observation.to_dict(),
                    "events": [], "status": game_session.game.status,
                })

            await self._session_loop(reader, session, send_error)
        finally:
            self.sessions.pop(sid, None)
            game_session = self.games.get(session.game_id or "")
            if game_session is not None:
                if session.role == "agent":
                    # the agent owns the game; tearing down ends the show
                    self._broadcast(game_session, "error",
                                    {"code": "game-closed", "message": "agent disconnected"})
                    self.games.pop(session.game_id, None)
                else:
                    game_session.spectators.pop(sid, None)
            try:
                writer.close()
            except Exception:
                pass

    async def _session_loop(self, reader, session: Session, send_error) -> None:
        while True:
            line = await reader.readline()
            if not line:
                return
            if line.strip() == b"":
                continue
            try:
                message = decode_line(line)
            except ProtocolError as exc:
                await send_error(exc.code, str(exc))
                return   # protocol violation closes the session
            if message.seq <= session.last_in_seq:
                await send_error("bad-seq",
                                 f"seq {message.seq} not above {session.last_in_seq}")
                return
            session.last_in_seq = message.seq

            game_session = self.games.get(session.game_id or "")
            if game_session is None:
                await send_error("no-game", "this session's game is gone")
                return

            if message.type == "chat":
                text = str(message.payload.get("text", ""))[:500]
                game_session.game.pending_messages.append(f"[chat {session.sid}] {text}")
                chat_payload = {"from": session.sid, "text": text}
                self._broadcast(game_session, "chat", chat_payload)
                if session.role == "spectator":
                    self._send_nowait(game_session.agent, "chat", chat_payload)
                continue

            if message.type != "action":
                await send_error("unknown-type",
                                 f"{message.type} not valid for a {session.role} session")
                continue
            if session.role != "agent":
                await send_error("not-agent", "spectators may only chat")
                continue
            await self._handle_action(session, game_session, message, send_error)

    async def _handle_action(self, session: Session, game_session: GameSession,
                             message: WireMessage, send_error) -> None:
        game = game_session.game
        if game_session.finished or game.status != GameStatus.RUNNING:
            await send_error("terminal", "the game is over")
            return
        try:
            action = Action.from_dict(message.payload.get("action"))
        except (ValueError, TypeError) as exc:
            await send_error("bad-action", str(exc))
            return

        try:
            if action.is_macro:
                await self._run_macro(session, game_session, action)
            else:
                result = step(game, action)
                await self._after_step(session, game_session, result)
        except TerminalStateError:
            await send_error("terminal", "the game is over")
        except MacroError as exc:
            await send_error("macro-error", str(exc))

    async def _run_macro(self, session: Session, game_session: GameSession,
                         macro: Action) -> None:
        game = game_session.game
        before = observe(game)
        primitives = expand_macro(macro, before)
        total = len(primitives)
        result = None
        for index, primitive in enumerate(primitives, start=1):
            result = step(game, primitive)
            aborted = None
            refused = any(e.get("type") == "refused" for e in result.events)
            if refused:
                aborted = "step refused"
            else:
                aborted = macro_interrupted(before, result.observation)
            await self._send(session, "macro_progress", {
                "index": index, "total": total,
                "action": primitive.to_dict(),
                "events": result.events,
                "status": result.status,
                "aborted": aborted,
            })
            self._broadcast_state(game_session, result)
            before = result.observation
            if result.status != GameStatus.RUNNING or aborted:
                break
        if result is not None:
            await self._after_step(session, game_session, result,
                                   broadcast=False)

    def _broadcast_state(self, game_session: GameSession, result) -> None:
        self._broadcast(game_session, "state", {
            "observation": result.observation.to_dict(),
            "events": result.events, "status": result.status,
        })

    async def _after_step(self, session: Session, game_session: GameSession,
                          result, broadcast: bool = True) -> None:
        game = game_session.game
        hit_limit = (
            game.turn_limit is not None
            and game.status == GameStatus.RUNNING
            and game.turn_count >= game.turn_limit
        )
        over = game.status != GameStatus.RUNNING or hit_limit
        await self._send(session, "state", {
            "observation": result.observation.to_dict(),
            "events": result.events, "status": result.status,
            "final": over,
        })
        if broadcast:
            self._broadcast_state(game_session, result)
        if over:
            outcome = {"won": "won", "dead": "dead"}.get(game.status, "truncated")
            payload = self._finish_game(game_session, outcome)
            await self._send(session, "game_over", payload)
            self._broadcast(game_session, "game_over", payload)


def run_server(config: ServerConfig) -> None:
    """Blocking entry point used by the CLI."""
    async def main():
        server = GatewayServer(config)
        await server.start()
        print(f"listening on {config.bind}:{server.port}")
        async with server._server:
            await server._server.serve_forever()

    asyncio.run(main())
