"""Newline-delimited JSON messages exchanged with a remote environment.

Every message is one UTF-8 JSON object on a single line with a ``type``
field; the remaining fields are the payload. Floats are written with
Python's shortest round-trip representation, so binary64 values survive a
trip over the wire unchanged.
"""

from __future__ import annotations

import json
import math
from typing import List, Sequence

from ..core.types import Action, Colloid

PROTOCOL_VERSION = 1
DEFAULT_PORT = 7878
MESSAGE_TYPES = ("hello", "config", "state_request", "state", "actions", "ack", "error", "kill", "bye")


class ProtocolError(RuntimeError):
    pass


class ProtocolVersionMismatch(ProtocolError):
    pass


class RemoteUnresponsive(ProtocolError):
    def __init__(self, detail: str = ""):
        super().__init__("remote environment unresponsive" + (f": {detail}" if detail else ""))


class RemoteError(ProtocolError):
    """Error reply sent by the other side."""


def encode(message: dict) -> bytes:
    if message.get("type") not in MESSAGE_TYPES:
        raise ProtocolError(f"unknown message type {message.get('type')!r}")
    return (json.dumps(message, separators=(",", ":"), allow_nan=False) + "\n").encode("utf-8")


def decode(line) -> dict:
    if isinstance(line, bytes):
        line = line.decode("utf-8")
    try:
        msg = json.loads(line)
    except json.JSONDecodeError as exc:
        raise ProtocolError(f"malformed JSON: {exc.msg}") from exc
    if not isinstance(msg, dict) or "type" not in msg:
        raise ProtocolError("message is not an object with a 'type' field")
    if msg["type"] not in MESSAGE_TYPES:
        raise ProtocolError(f"unknown message type {msg['type']!r}")
    return msg


def _floats(v, name: str) -> List[float]:
    out = [float(x) for x in v]
    if len(out) != 3 or not all(math.isfinite(x) for x in out):
        raise ProtocolError(f"{name} must be three finite numbers")
    return out


def colloid_record(c: Colloid) -> dict:
    return {
        "id": c.id,
        "type": c.type,
        "pos": [float(x) for x in c.pos],
        "director": [float(x) for x in c.director],
        "velocity": [float(x) for x in c.velocity],
    }


def record_colloid(rec: dict) -> Colloid:
    try:
        return Colloid(
            pos=_floats(rec["pos"], "pos"),
            director=_floats(rec["director"], "director"),
            id=int(rec["id"]),
            velocity=_floats(rec["velocity"], "velocity"),
            type=int(rec["type"]),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ProtocolError(f"bad colloid record: {exc}") from exc


def action_record(colloid_id: int, a: Action) -> dict:
    return {
        "id": int(colloid_id),
        "force": float(a.force),
        "torque": [float(x) for x in a.torque],
        "new_direction": None if a.new_direction is None else [float(x) for x in a.new_direction],
    }


def record_action(rec: dict) -> Action:
    try:
        nd = rec.get("new_direction")
        return Action(
            force=float(rec["force"]),
            torque=_floats(rec["torque"], "torque"),
            new_direction=None if nd is None else _floats(nd, "new_direction"),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ProtocolError(f"bad action record: {exc}") from exc


def state_message(colloids: Sequence[Colloid], time: float) -> dict:
    return {"type": "state", "time": float(time), "colloids": [colloid_record(c) for c in colloids]}


def actions_message(colloids: Sequence[Colloid], actions: Sequence[Action]) -> dict:
    return {"type": "actions", "actions": [action_record(c.id, a) for c, a in zip(colloids, actions)]}
