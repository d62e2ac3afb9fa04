"""Engine that drives an environment living behind a TCP socket."""

from __future__ import annotations

import socket
from collections import Counter
from typing import List, Optional, Tuple

from ..core.types import Colloid
from ..engine.base import ActionCardinalityError, Engine
from .protocol import (
    DEFAULT_PORT,
    PROTOCOL_VERSION,
    ProtocolError,
    ProtocolVersionMismatch,
    RemoteError,
    RemoteUnresponsive,
    actions_message,
    decode,
    encode,
    record_colloid,
)


class RemoteEngine(Engine):
    """Client side of the wire protocol.

    Parameters
    ----------
    address : (host, port)
    timeout : float
        Seconds to wait for any reply.
    seed : int, optional
        Sent with the hello so the server can build a matching environment.
    """

    def __init__(self, address: Tuple[str, int] = ("127.0.0.1", DEFAULT_PORT), timeout: float = 30.0,
                 seed: Optional[int] = None):
        self.address = (address[0], int(address[1]))
        self.timeout = timeout
        self.sent: Counter = Counter()
        self.time = 0.0
        self.terminated = False
        self._last: List[Colloid] = []
        try:
            self._sock = socket.create_connection(self.address, timeout=timeout)
        except socket.timeout as exc:
            raise RemoteUnresponsive("connect timed out") from exc
        self._sock.settimeout(timeout)
        self._reader = self._sock.makefile("rb")
        hello = {"type": "hello", "protocol_version": PROTOCOL_VERSION}
        if seed is not None:
            hello["seed"] = int(seed)
        reply = self._request(hello)
        if reply["type"] == "error" or reply.get("protocol_version") != PROTOCOL_VERSION:
            self._shut()
            raise ProtocolVersionMismatch(reply.get("message", f"server speaks version {reply.get('protocol_version')!r}"))
        self.n_particles = reply.get("n_particles")

    def _send(self, msg: dict):
        self.sent[msg["type"]] += 1
        try:
            self._sock.sendall(encode(msg))
        except socket.timeout as exc:
            raise RemoteUnresponsive("send timed out") from exc

    def _recv(self) -> dict:
        try:
            line = self._reader.readline()
        except socket.timeout as exc:
            raise RemoteUnresponsive(f"no reply within {self.timeout} s") from exc
        if not line:
            raise ProtocolError("connection closed by remote environment")
        return decode(line)

    def _request(self, msg: dict) -> dict:
        self._send(msg)
        return self._recv()

    def _fetch_state(self) -> Optional[List[Colloid]]:
        reply = self._request({"type": "state_request"})
        if reply["type"] == "bye":
            self._finish()
            return None
        if reply["type"] == "error":
            raise RemoteError(reply.get("message", "remote error"))
        if reply["type"] != "state":
            raise ProtocolError(f"expected state, got {reply['type']!r}")
        self.time = float(reply["time"])
        self._last = [record_colloid(r) for r in reply["colloids"]]
        return self._last

    def integrate(self, n_slices: int, force_model) -> bool:
        if self.terminated:
            return True
        if int(n_slices) != n_slices or n_slices < 1:
            raise ValueError(f"n_slices must be a positive integer, got {n_slices!r}")
        for _ in range(int(n_slices)):
            colloids = self._fetch_state()
            if colloids is None:
                return True
            actions = force_model.calc_action(colloids)
            if getattr(force_model, "kill_switch", False):
                self._send({"type": "kill"})
                self._recv()
                self._finish()
                return True
            if len(actions) != len(colloids):
                raise ActionCardinalityError(len(colloids), len(actions))
            reply = self._request(actions_message(colloids, actions))
            if reply["type"] == "error":
                raise RemoteError(reply.get("message", "remote error"))
            if reply["type"] == "bye":
                self._finish()
                return True
            self.time = float(reply.get("time", self.time))
        return False

    def get_particle_data(self) -> List[Colloid]:
        if self.terminated:
            return list(self._last)
        colloids = self._fetch_state()
        return list(self._last) if colloids is None else colloids

    def _finish(self):
        self.terminated = True
        self._shut()

    def _shut(self):
        try:
            self._reader.close()
            self._sock.close()
        except OSError:
            pass

    def close(self) -> None:
        if self.terminated:
            return
        try:
            self._send({"type": "bye"})
            self._recv()
        except (ProtocolError, OSError):
            pass
        self._finish()
