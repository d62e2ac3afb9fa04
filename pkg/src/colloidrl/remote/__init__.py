from .client import RemoteEngine
from .protocol import (
    DEFAULT_PORT,
    MESSAGE_TYPES,
    PROTOCOL_VERSION,
    ProtocolError,
    ProtocolVersionMismatch,
    RemoteError,
    RemoteUnresponsive,
    decode,
    encode,
)
from .server import LoopbackServer, serve

__all__ = [
    "DEFAULT_PORT",
    "MESSAGE_TYPES",
    "PROTOCOL_VERSION",
    "LoopbackServer",
    "ProtocolError",
    "ProtocolVersionMismatch",
    "RemoteEngine",
    "RemoteError",
    "RemoteUnresponsive",
    "decode",
    "encode",
    "serve",
]
