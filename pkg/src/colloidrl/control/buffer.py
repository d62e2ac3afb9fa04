"""Per-species episode storage."""

from __future__ import annotations

from typing import List, Optional

import numpy as np

from ..learn.update import Batch


class MisalignedBuffer(ValueError):
    pass


class TrajectoryBuffer:
    """Decisions and their outcomes, one entry per slice.

    A decision (observation, action, log-probability, value) is recorded when
    an action is chosen; its reward arrives with the next observation of the
    system, so between those two moments the buffer has one pending entry.
    """

    def __init__(self):
        self.clear()

    def clear(self) -> None:
        self.observations: List[np.ndarray] = []
        self.actions: List[np.ndarray] = []
        self.log_probs: List[np.ndarray] = []
        self.values: List[np.ndarray] = []
        self.explored: List[np.ndarray] = []
        self.rewards: List[np.ndarray] = []
        self.intrinsic: List[np.ndarray] = []
        self.final_observations: Optional[np.ndarray] = None

    def __len__(self) -> int:
        return len(self.rewards)

    @property
    def n_decisions(self) -> int:
        return len(self.actions)

    @property
    def pending(self) -> bool:
        return len(self.actions) > len(self.rewards)

    @property
    def aligned(self) -> bool:
        n = len(self.actions)
        lengths = {len(self.observations), len(self.log_probs), len(self.values), len(self.explored), len(self.rewards)}
        if self.intrinsic:
            lengths.add(len(self.intrinsic))
        return lengths == {n}

    def record_decision(self, observations, actions, log_probs, values, explored=None) -> None:
        if self.pending:
            raise MisalignedBuffer("previous decision has no outcome yet")
        actions = np.asarray(actions, dtype=np.int64)
        self.observations.append(np.asarray(observations, dtype=np.float64).copy())
        self.actions.append(actions.copy())
        self.log_probs.append(np.asarray(log_probs, dtype=np.float64).copy())
        self.values.append(np.asarray(values, dtype=np.float64).copy())
        self.explored.append(np.zeros(actions.shape, bool) if explored is None else np.asarray(explored, bool).copy())

    def record_outcome(self, rewards, intrinsic=None) -> None:
        if not self.pending:
            raise MisalignedBuffer("no pending decision to attach a reward to")
        rewards = np.asarray(rewards, dtype=np.float64)
        if rewards.shape != self.actions[-1].shape:
            raise MisalignedBuffer(f"got {rewards.shape} rewards for {self.actions[-1].shape} agents")
        self.rewards.append(rewards.copy())
        if intrinsic is not None:
            self.intrinsic.append(np.asarray(intrinsic, dtype=np.float64).copy())

    def to_batch(self) -> Batch:
        if not self.actions:
            raise MisalignedBuffer("empty episode")
        if not self.aligned:
            raise MisalignedBuffer("buffer fields have different lengths")
        return Batch(
            observations=np.stack(self.observations),
            actions=np.stack(self.actions),
            log_probs=np.stack(self.log_probs),
            values=np.stack(self.values),
            rewards=np.stack(self.rewards),
            intrinsic=np.stack(self.intrinsic) if self.intrinsic else None,
            explored=np.stack(self.explored),
            final_observations=self.final_observations,
        )
