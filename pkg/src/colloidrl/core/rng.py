"""Counter-based random numbers.

Every draw is a pure function of ``(seed, stream_id, purpose, counter)``:
the triple is hashed with the SplitMix64 finalizer, so adding particles,
reordering loops or parallelising never perturbs another stream. The
compiled engine kernel re-implements :func:`mix64` bit for bit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import IntEnum

import numpy as np

MASK64 = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15
STREAM_MUL = 0xD1B54A32D192ED03
MIX_A = 0xBF58476D1CE4E5B9
MIX_B = 0x94D049BB133111EB
# 2**-53
_UNIT = 1.0 / 9007199254740992.0


class Purpose(IntEnum):
    TRANSLATION = 1
    ROTATION = 2
    POLICY = 3
    EXPLORATION = 4
    PLACEMENT = 5
    NETWORK_INIT = 6
    RND = 7
    MISC = 8


def mix64_int(z: int) -> int:
    z &= MASK64
    z = ((z ^ (z >> 30)) * MIX_A) & MASK64
    z = ((z ^ (z >> 27)) * MIX_B) & MASK64
    return z ^ (z >> 31)


def stream_key(seed: int, stream_id: int, purpose: int) -> int:
    """64-bit key identifying one stream."""
    base = mix64_int((int(seed) + GOLDEN) & MASK64)
    tag = (int(stream_id) * STREAM_MUL + int(purpose) * GOLDEN) & MASK64
    return mix64_int(base ^ mix64_int(tag))


def mix64(z: np.ndarray) -> np.ndarray:
    z = np.asarray(z, dtype=np.uint64)
    z = (z ^ (z >> np.uint64(30))) * np.uint64(MIX_A)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(MIX_B)
    return z ^ (z >> np.uint64(31))


def random_bits(keys, counters) -> np.ndarray:
    """Raw 64-bit outputs for (key, counter) pairs; arguments broadcast."""
    keys = np.atleast_1d(np.asarray(keys, dtype=np.uint64))
    counters = np.atleast_1d(np.asarray(counters, dtype=np.uint64))
    ctr = mix64((counters + np.uint64(1)) * np.uint64(GOLDEN))
    return mix64(keys ^ ctr)


def bits_to_unit(bits: np.ndarray) -> np.ndarray:
    """Map 64-bit integers to doubles strictly inside (0, 1)."""
    return ((bits >> np.uint64(11)).astype(np.float64) + 0.5) * _UNIT


def uniform_at(keys, counters) -> np.ndarray:
    return bits_to_unit(random_bits(keys, counters))


def box_muller(u0: np.ndarray, u1: np.ndarray):
    radius = np.sqrt(-2.0 * np.log(u0))
    angle = 2.0 * math.pi * u1
    return radius * np.cos(angle), radius * np.sin(angle)


@dataclass
class RngStream:
    """A single stream with a draw counter.

    The stream object only tracks how many uniforms have been consumed; the
    values themselves depend on nothing but the identifying triple and the
    counter, so two streams with equal fields produce equal draws.
    """

    seed: int
    stream_id: int = 0
    purpose: int = Purpose.MISC
    counter: int = 0

    def __post_init__(self):
        self.seed = int(self.seed) & MASK64
        if self.stream_id < 0:
            raise ValueError("stream_id must be non-negative")
        self._key = stream_key(self.seed, self.stream_id, self.purpose)

    @property
    def key(self) -> int:
        return self._key

    def _take(self, n: int) -> np.ndarray:
        counters = np.arange(self.counter, self.counter + n, dtype=np.uint64)
        self.counter += n
        return counters

    def uniform(self, size: int = 1) -> np.ndarray:
        return uniform_at(self._key, self._take(int(size)))

    def normal(self, size: int = 1) -> np.ndarray:
        size = int(size)
        pairs = (size + 1) // 2
        u = uniform_at(self._key, self._take(2 * pairs))
        z0, z1 = box_muller(u[0::2], u[1::2])
        out = np.empty(2 * pairs)
        out[0::2] = z0
        out[1::2] = z1
        return out[:size]

    def gumbel(self, size: int = 1) -> np.ndarray:
        return -np.log(-np.log(self.uniform(size)))

    def integers(self, high: int, size: int = 1) -> np.ndarray:
        """Uniform integers in ``[0, high)``."""
        idx = np.floor(self.uniform(size) * high).astype(np.int64)
        return np.minimum(idx, high - 1)

    def spawn(self, purpose: int, stream_id: int | None = None) -> "RngStream":
        return RngStream(self.seed, self.stream_id if stream_id is None else stream_id, purpose)


def derive_seed(seed: int, *parts: int) -> int:
    """Deterministic child seed, e.g. ``derive_seed(run_seed, episode)``."""
    h = mix64_int((int(seed) + GOLDEN) & MASK64)
    for p in parts:
        h = mix64_int(h ^ mix64_int((int(p) + 1) * GOLDEN & MASK64))
    return h
