"""Reference server exposing a local engine over the wire protocol."""

from __future__ import annotations

import logging
import socket
import threading
from collections import Counter
from typing import Callable, Optional, Tuple

from ..core.types import SimParams
from ..engine.base import ActionCardinalityError, Engine
from .protocol import (
    DEFAULT_PORT,
    PROTOCOL_VERSION,
    ProtocolError,
    decode,
    encode,
    record_action,
    state_message,
)

log = logging.getLogger(__name__)


class _Replay:
    """Force model returning a fixed list of actions once."""

    kill_switch = False

    def __init__(self, actions):
        self.actions = actions

    def calc_action(self, colloids):
        return self.actions


class _Session:
    def __init__(self, server: "LoopbackServer", conn: socket.socket):
        self.server = server
        self.conn = conn
        self.reader = conn.makefile("rb")
        self.engine: Optional[Engine] = None
        self.greeted = False
        self.state_sent = False
        self.slices = 0

    def send(self, msg: dict):
        self.server.sent[msg["type"]] += 1
        self.conn.sendall(encode(msg))

    def error(self, text: str):
        self.send({"type": "error", "message": text})

    def run(self):
        while True:
            line = self.reader.readline()
            if not line:
                return
            try:
                msg = decode(line)
            except ProtocolError as exc:
                self.error(str(exc))
                return
            self.server.received[msg["type"]] += 1
            try:
                if not self.handle(msg):
                    return
            except ProtocolError as exc:
                self.error(str(exc))

    def handle(self, msg: dict) -> bool:
        kind = msg["type"]
        if kind == "hello":
            if self.greeted:
                raise ProtocolError("protocol sequence violation: repeated hello")
            version = msg.get("protocol_version")
            if version != PROTOCOL_VERSION:
                self.send({"type": "error", "message": f"protocol version {version!r} not supported; server speaks {PROTOCOL_VERSION}"})
                return False
            self.engine = self.server.make_engine(msg.get("seed"))
            self.greeted = True
            self.send({"type": "hello", "protocol_version": PROTOCOL_VERSION,
                       "n_particles": len(self.engine.get_particle_data())})
            return True
        if not self.greeted:
            raise ProtocolError("protocol sequence violation: hello expected first")
        if kind == "config":
            params: SimParams = getattr(self.engine, "params", None)
            payload = {} if params is None else {
                "dim": params.dim, "box": list(params.box), "dt": params.dt,
                "steps_per_slice": params.steps_per_slice, "boundary": params.boundary,
            }
            self.send({"type": "config", **payload})
            return True
        if kind == "state_request":
            limit = self.server.max_slices
            if limit is not None and self.slices >= limit:
                self.send({"type": "bye", "reason": "slice limit reached"})
                return False
            self.send(state_message(self.engine.get_particle_data(), getattr(self.engine, "time", 0.0)))
            self.state_sent = True
            return True
        if kind == "actions":
            if not self.state_sent:
                raise ProtocolError("protocol sequence violation: actions before state")
            self._integrate(msg.get("actions"))
            self.state_sent = False
            self.slices += 1
            self.send({"type": "ack", "time": float(getattr(self.engine, "time", 0.0))})
            return True
        if kind in ("kill", "bye"):
            self.send({"type": "bye"})
            return False
        raise ProtocolError(f"protocol sequence violation: unexpected {kind!r}")

    def _integrate(self, records):
        if not isinstance(records, list):
            raise ProtocolError("actions payload must be a list")
        colloids = self.engine.get_particle_data()
        index = {c.id: k for k, c in enumerate(colloids)}
        actions = [None] * len(colloids)
        for rec in records:
            cid = rec.get("id") if isinstance(rec, dict) else None
            if cid not in index:
                raise ProtocolError(f"unknown colloid id {cid!r}")
            actions[index[cid]] = record_action(rec)
        if any(a is None for a in actions) or len(records) != len(colloids):
            raise ProtocolError(str(ActionCardinalityError(len(colloids), len(records))))
        self.engine.integrate(1, _Replay(actions))

    def close(self):
        try:
            self.reader.close()
            self.conn.close()
        except OSError:
            pass


class LoopbackServer:
    """Serve one controller connection at a time.

    Parameters
    ----------
    engine_factory : callable
        ``factory(seed)`` returning a fresh engine. It is called on every
        hello; ``seed`` is the one carried by the hello or None.
    host, port : address to bind; port 0 picks a free one.
    max_slices : int, optional
        Reply ``bye`` to state requests once this many slices have run.
    """

    def __init__(self, engine_factory: Callable[[Optional[int]], Engine], host: str = "127.0.0.1",
                 port: int = DEFAULT_PORT, max_slices: Optional[int] = None):
        self.engine_factory = engine_factory
        self.max_slices = max_slices
        self.sent: Counter = Counter()
        self.received: Counter = Counter()
        self._sock = socket.create_server((host, port))
        self._stop = threading.Event()
        self._thread: Optional[threading.Thread] = None

    @property
    def address(self) -> Tuple[str, int]:
        return self._sock.getsockname()[:2]

    def make_engine(self, seed):
        return self.engine_factory(None if seed is None else int(seed))

    def serve(self, max_connections: Optional[int] = None) -> None:
        served = 0
        self._sock.settimeout(0.2)
        while not self._stop.is_set():
            if max_connections is not None and served >= max_connections:
                break
            try:
                conn, _ = self._sock.accept()
            except socket.timeout:
                continue
            except OSError:
                break
            conn.settimeout(None)
            session = _Session(self, conn)
            try:
                session.run()
            except (OSError, ValueError) as exc:
                log.warning("session ended: %s", exc)
            finally:
                session.close()
                if session.engine is not None:
                    session.engine.close()
            served += 1

    def start(self) -> "LoopbackServer":
        self._thread = threading.Thread(target=self.serve, daemon=True)
        self._thread.start()
        return self

    def shutdown(self) -> None:
        self._stop.set()
        if self._thread is not None:
            self._thread.join(timeout=5)
        self._sock.close()

    def __enter__(self):
        return self.start()

    def __exit__(self, *exc):
        self.shutdown()


def serve(engine_factory, bind: Tuple[str, int] = ("127.0.0.1", DEFAULT_PORT), max_slices=None) -> None:
    """Blocking server loop until interrupted."""
    server = LoopbackServer(engine_factory, bind[0], bind[1], max_slices)
    log.info("serving on %s:%d", *server.address)
    try:
        server.serve()
    finally:
        server.shutdown()
