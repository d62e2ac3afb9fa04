"""Random exploration with an exponentially decaying probability."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..core.rng import RngStream


def exploration_schedule(zeta0: float, decay: float, t: float, T: float) -> float:
    """``exp(-decay * t / T) * zeta0``."""
    if T <= 0:
        raise ValueError("episode length T must be positive")
    return math.exp(-decay * t / T) * zeta0


def apply_exploration(indices, zeta: float, n_actions: int, rng: RngStream):
    """Replace each index with a uniform random one with probability ``zeta``.

    Returns ``(indices, explored_mask)``. Two uniforms are drawn per
    decision regardless of the outcome, so the stream position never
    depends on earlier results.
    """
    idx = np.array(indices, dtype=np.int64, copy=True).ravel()
    n = idx.size
    u = rng.uniform(2 * n)
    explore = u[:n] < zeta
    random_idx = np.minimum(np.floor(u[n:] * n_actions).astype(np.int64), n_actions - 1)
    idx[explore] = random_idx[explore]
    return idx, explore


@dataclass
class RandomExploration:
    """Exploration probability ``zeta0`` decaying over elapsed slices.

    ``t`` counts slices since training began and ``episode_length`` plays
    the role of the episode time ``T``.
    """

    zeta0: float = 0.1
    decay: float = 1.0
    episode_length: int = 1

    def __post_init__(self):
        if not 0.0 <= self.zeta0 <= 1.0:
            raise ValueError("zeta0 must lie in [0, 1]")
        if self.decay < 0:
            raise ValueError("decay must be non-negative")

    def zeta(self, t: float) -> float:
        return exploration_schedule(self.zeta0, self.decay, t, self.episode_length)

    def __call__(self, indices, t: float, n_actions: int, rng: RngStream):
        return apply_exploration(indices, self.zeta(t), n_actions, rng)
