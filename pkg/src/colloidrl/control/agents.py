"""Agents bind a species to its observable, task, actions and controller."""

from __future__ import annotations

from typing import Dict, List, Mapping, Optional, Sequence

import numpy as np

from ..core.rng import Purpose, RngStream
from ..core.types import Action, Colloid
from ..learn.exploration import RandomExploration
from ..learn.networks import ActorCritic
from ..learn.optim import make_optimizer
from ..learn.rnd import RNDReward
from ..learn.sampling import log_softmax, sample_action
from ..learn.update import UpdateConfig, update_policy
from ..objectives import Task, aggregate_rewards
from ..sensing import Observable, select_type
from .buffer import TrajectoryBuffer


class Agent:
    """Controls every particle of ``particle_type``."""

    trainable = False

    def __init__(self, particle_type: int):
        self.particle_type = int(particle_type)
        self.task: Optional[Task] = None

    def calc_action(self, colloids: Sequence[Colloid]) -> List[Action]:
        """One action per particle of this species, in colloid order."""
        raise NotImplementedError

    @property
    def kill_switch(self) -> bool:
        return self.task.kill_switch if self.task is not None else False

    def finalize(self, colloids: Sequence[Colloid]) -> None:
        """Close the current episode with the final state."""

    def reset(self) -> None:
        if self.task is not None:
            self.task.reset()


class ActorCriticAgent(Agent):
    """A species steered by a shared actor-critic policy.

    Every particle of the species is evaluated by the same network and
    contributes to the same update (centralised learning, decentralised
    execution).
    """

    trainable = True

    def __init__(
        self,
        particle_type: int,
        network: ActorCritic,
        task: Task,
        observable: Observable,
        actions: Mapping[str, Action],
        update_config: UpdateConfig = UpdateConfig(),
        exploration: Optional[RandomExploration] = None,
        intrinsic_reward: Optional[RNDReward] = None,
        reward_mode: str = "individual",
        seed: int = 0,
        optimizer=None,
    ):
        super().__init__(particle_type)
        if not actions:
            raise ValueError("an actor-critic agent needs at least one action")
        if network.n_actions != len(actions):
            raise ValueError(f"network has {network.n_actions} outputs for {len(actions)} actions")
        self.network = network
        self.task = task
        self.observable = observable
        self.action_names = list(actions)
        self.actions = [actions[k] for k in self.action_names]
        self.config = update_config
        self.exploration = exploration
        self.intrinsic_reward = intrinsic_reward
        self.reward_mode = reward_mode
        self.optimizer = optimizer or make_optimizer(update_config.optimizer, update_config.learning_rate)
        self.policy_rng = RngStream(seed, self.particle_type, Purpose.POLICY)
        self.exploration_rng = RngStream(seed, self.particle_type, Purpose.EXPLORATION)
        self.buffer = TrajectoryBuffer()
        self.slices_seen = 0
        self.update_count = 0
        self.last_indices: Optional[np.ndarray] = None
        self.recording = True

    def _observe(self, colloids) -> np.ndarray:
        return self.observable(colloids).values

    def _evaluate(self, colloids, obs: np.ndarray) -> None:
        # the task sees every slice so history-carrying rewards and kill
        # conditions start from the first state of the episode
        rewards = self.task(colloids)
        if not self.buffer.pending:
            return
        rewards = aggregate_rewards(rewards, self.reward_mode)
        intrinsic = self.intrinsic_reward(obs) if self.intrinsic_reward is not None else None
        self.buffer.record_outcome(rewards, intrinsic)

    def calc_action(self, colloids):
        obs = self._observe(colloids)
        self._evaluate(colloids, obs)
        n = obs.shape[0]
        if self.kill_switch:
            self.last_indices = np.full(n, -1)
            return [Action() for _ in range(n)]
        if n == 0:
            self.last_indices = np.zeros(0, dtype=np.int64)
            return []
        logits, values = self.network.forward(obs)
        idx, logp = sample_action(self.policy_rng, logits=logits, sampler=self.config.sampler)
        explored = np.zeros(n, dtype=bool)
        if self.exploration is not None:
            idx, explored = self.exploration(idx, self.slices_seen, len(self.actions), self.exploration_rng)
            logp = log_softmax(logits)[np.arange(n), idx]
        if self.recording:
            self.buffer.record_decision(obs, idx, logp, values, explored)
        self.slices_seen += 1
        self.last_indices = idx
        return [self.actions[i] for i in idx]

    def finalize(self, colloids):
        if self.buffer.pending:
            obs = self._observe(colloids)
            self._evaluate(colloids, obs)
            self.buffer.final_observations = obs

    def update(self, clear: bool = True) -> Dict[str, float]:
        """Train on the collected episode, then clear the buffer unless asked not to."""
        batch = self.buffer.to_batch()
        if self.intrinsic_reward is not None:
            visited = batch.observations.reshape(-1, batch.observations.shape[-1])
            self.intrinsic_reward.update_normalizer(visited)
            self.intrinsic_reward.train(visited)
        diagnostics = update_policy(self.network, self.optimizer, batch, self.config)
        if clear:
            self.buffer.clear()
        self.update_count += 1
        return diagnostics

    def reset(self):
        super().reset()
        self.observable.reset()
        self.buffer.clear()


class ClassicalAgent(Agent):
    """Rule-based agent; children implement :meth:`compute_action`."""

    def __init__(self, particle_type: int, task: Optional[Task] = None):
        super().__init__(particle_type)
        self.task = task

    def compute_action(self, colloids: Sequence[Colloid], focal: Colloid) -> Action:
        raise NotImplementedError

    def calc_action(self, colloids):
        if self.task is not None:
            self.task(colloids)
        return [self.compute_action(colloids, c) for c in select_type(colloids, self.particle_type)]
