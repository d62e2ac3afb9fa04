"""Training loops: continuous, episodic and semi-episodic."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Dict, List, Mapping, Optional

import numpy as np

from ..control.buffer import MisalignedBuffer, TrajectoryBuffer
from ..control.force_function import ForceFunction
from ..core.rng import derive_seed
from ..learn.checkpoint import save_checkpoint
from ..sensing import select_type
from .persistence import REWARD_HEADER, TRAJECTORY_HEADER, CsvLog, trajectory_rows

log = logging.getLogger(__name__)

MODES = ("continuous", "episodic")


class TrainingError(RuntimeError):
    def __init__(self, episode: int, message: str):
        super().__init__(f"episode {episode}: {message}")
        self.episode = episode


@dataclass(frozen=True)
class TrainConfig:
    """Loop settings.

    ``episode_length`` is the number of slices between two updates.
    ``reset_frequency`` only matters for episodic runs: the environment is
    rebuilt every that many episodes (1 is fully episodic).
    """

    mode: str = "episodic"
    n_episodes: int = 1
    episode_length: int = 20
    reset_frequency: int = 1
    seed: int = 0
    checkpoint_every: int = 0
    trajectory_every: int = 1

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}")
        if self.n_episodes < 0:
            raise ValueError("n_episodes must be >= 0")
        if self.episode_length < 1:
            raise ValueError("episode_length must be >= 1")
        if self.reset_frequency < 1:
            raise ValueError("reset_frequency must be >= 1")
        if self.checkpoint_every < 0 or self.trajectory_every < 0:
            raise ValueError("cadences must be >= 0")


@dataclass
class SpeciesSummary:
    mean_reward: float
    cum_reward: float
    actor_loss: float = float("nan")
    critic_loss: float = float("nan")
    entropy: float = float("nan")
    n_slices: int = 0
    n_agents: int = 0


@dataclass
class EpisodeSummary:
    episode: int
    species: Dict[int, SpeciesSummary] = field(default_factory=dict)
    killed: bool = False
    rebuilt: bool = False

    def reward_rows(self) -> List[tuple]:
        return [
            (self.episode, t, s.mean_reward, s.cum_reward, s.actor_loss, s.critic_loss, s.entropy)
            for t, s in sorted(self.species.items())
        ]


def record_episode(buffers: Mapping[int, TrajectoryBuffer], diagnostics: Optional[Mapping[int, dict]] = None,
                   episode: int = 0, killed: bool = False, rebuilt: bool = False) -> EpisodeSummary:
    """Per-species reward statistics of one finished episode.

    ``cum_reward`` is the per-agent sum over slices averaged over agents;
    ``mean_reward`` averages over slices and agents.
    """
    summary = EpisodeSummary(episode, killed=killed, rebuilt=rebuilt)
    for t, buf in buffers.items():
        if buf.n_decisions == 0:
            raise ValueError(f"empty episode for species {t}")
        if buf.pending or not buf.aligned:
            raise MisalignedBuffer(f"species {t}: buffer is not aligned")
        rewards = np.stack(buf.rewards)
        diag = (diagnostics or {}).get(t, {})
        summary.species[t] = SpeciesSummary(
            mean_reward=float(rewards.mean()),
            cum_reward=float(rewards.sum(axis=0).mean()),
            actor_loss=float(diag.get("actor_loss", float("nan"))),
            critic_loss=float(diag.get("critic_loss", float("nan"))),
            entropy=float(diag.get("entropy", float("nan"))),
            n_slices=rewards.shape[0],
            n_agents=rewards.shape[1],
        )
    return summary


class RunOutput:
    """Trajectory, reward and checkpoint files of a run in one directory."""

    def __init__(self, directory, trajectory: bool = True):
        self.directory = Path(directory)
        self.directory.mkdir(parents=True, exist_ok=True)
        self.trajectory = CsvLog(self.directory / "trajectory.csv", TRAJECTORY_HEADER) if trajectory else None
        self.rewards = CsvLog(self.directory / "rewards.csv", REWARD_HEADER)
        self.checkpoint_dir = self.directory / "checkpoints"

    def close(self, complete: bool = True) -> None:
        if self.trajectory is not None:
            self.trajectory.close(complete)
        self.rewards.close(complete)


class _Recorder:
    """Force-function proxy that logs the snapshot each decision was made from."""

    def __init__(self, ff: ForceFunction, every: int):
        self.ff = ff
        self.every = every
        self.engine = None
        self.sink: Optional[CsvLog] = None
        self.slice = 0
        self.stopped_at_kill = False

    def bind(self, engine, sink):
        self.engine, self.sink, self.slice = engine, sink, 0

    def _indices(self, colloids) -> dict:
        out = {}
        for t, agent in self.ff.agents.items():
            idx = getattr(agent, "last_indices", None)
            if idx is None:
                continue
            for c, a in zip(select_type(colloids, t), idx):
                out[c.id] = int(a)
        return out

    def write(self, colloids, indices=None):
        if self.sink is not None and self.every:
            self.sink.write(trajectory_rows(colloids, indices, getattr(self.engine, "time", 0.0)))

    def calc_action(self, colloids):
        actions = self.ff.calc_action(colloids)
        self.stopped_at_kill = self.ff.kill_switch
        if self.every and (self.slice % self.every == 0 or self.stopped_at_kill):
            self.write(colloids, self._indices(colloids))
        self.slice += 1
        return actions

    @property
    def kill_switch(self) -> bool:
        return self.ff.kill_switch


class Trainer:
    """Shared machinery of the training loops.

    Parameters
    ----------
    force_function : ForceFunction
    config : TrainConfig
    engine : Engine, optional
        Used as is by continuous runs.
    engine_factory : callable, optional
        ``factory(seed) -> Engine``; episodic runs call it with
        ``derive_seed(config.seed, episode)`` at every rebuild.
    output_dir : path, optional
        Where trajectory/reward CSVs and checkpoints go.
    """

    def __init__(self, force_function: ForceFunction, config: TrainConfig, engine=None,
                 engine_factory: Optional[Callable] = None, output_dir=None, write_trajectory: bool = True):
        self.ff = force_function
        self.config = config
        self.engine = engine
        self.engine_factory = engine_factory
        self.output = RunOutput(output_dir, write_trajectory) if output_dir is not None else None
        self.history: List[EpisodeSummary] = []
        self.update_counts = {t: 0 for t in self.ff.trainable_agents}
        self.interrupted = False
        self._rec = _Recorder(force_function, config.trajectory_every if write_trajectory else 0)

    def _build(self, episode: int):
        if self.engine_factory is None:
            raise TrainingError(episode, "episodic training needs an engine factory")
        if self.engine is not None:
            self.engine.close()
            self.engine = None
        try:
            self.engine = self.engine_factory(derive_seed(self.config.seed, episode))
        except Exception as exc:
            raise TrainingError(episode, f"failed to build environment: {exc}") from exc
        self.ff.reset()
        self._rec.bind(self.engine, self.output.trajectory if self.output else None)

    def _run_episode(self, episode: int, closing_hint: bool, rebuilt: bool) -> Optional[EpisodeSummary]:
        """Integrate one episode, update every trainable species and log it."""
        try:
            killed = self.engine.integrate(self.config.episode_length, self._rec)
            final = self.engine.get_particle_data()
        except Exception as exc:
            raise TrainingError(episode, str(exc)) from exc
        killed_in_slice = bool(killed)
        self.ff.finalize(final)
        killed = killed_in_slice or self.ff.kill_switch
        if (closing_hint or killed) and not killed_in_slice:
            self._rec.write(final)
        trainable = self.ff.trainable_agents
        buffers = {t: a.buffer for t, a in trainable.items()}
        if trainable and all(b.n_decisions == 0 for b in buffers.values()):
            return None
        diagnostics = {}
        for t, agent in trainable.items():
            try:
                diagnostics[t] = agent.update(clear=False)
            except (FloatingPointError, ValueError) as exc:
                raise TrainingError(episode, f"update of species {t} failed: {exc}") from exc
            self.update_counts[t] += 1
        summary = record_episode(buffers, diagnostics, episode, killed, rebuilt)
        for b in buffers.values():
            b.clear()
        self.history.append(summary)
        if self.output is not None:
            self.output.rewards.write(summary.reward_rows())
            self.output.rewards.flush()
            if self.output.trajectory is not None:
                self.output.trajectory.flush()
            if self.config.checkpoint_every and (episode + 1) % self.config.checkpoint_every == 0:
                self.save_checkpoints()
        return summary

    def save_checkpoints(self) -> None:
        if self.output is None:
            return
        for t, agent in self.ff.trainable_agents.items():
            save_checkpoint(self.output.checkpoint_dir / f"species_{t}.json", agent.network,
                            agent.optimizer, self.update_counts[t])

    def _loop(self) -> None:
        raise NotImplementedError

    def train(self) -> List[EpisodeSummary]:
        ok = False
        try:
            self._loop()
            ok = True
        except KeyboardInterrupt:
            log.warning("interrupted; writing checkpoint and closing outputs")
            self.interrupted = True
            ok = True
        finally:
            if self.output is not None:
                if ok:
                    self.save_checkpoints()
                self.output.close(complete=ok)
        return self.history


class ContinuousTrainer(Trainer):
    """Update every ``episode_length`` slices without ever resetting.

    A kill raised by a task ends training after the episode it occurred in
    has been recorded.
    """

    def _loop(self):
        if self.engine is None:
            raise TrainingError(0, "continuous training needs an engine")
        self._rec.bind(self.engine, self.output.trajectory if self.output else None)
        n = self.config.n_episodes
        for ep in range(n):
            summary = self._run_episode(ep, closing_hint=ep == n - 1, rebuilt=False)
            if summary is None or summary.killed or self.ff.kill_switch:
                break


class EpisodicTrainer(Trainer):
    """Update every episode and rebuild the environment every
    ``reset_frequency`` episodes, or straight after a kill."""

    def _loop(self):
        cfg = self.config
        rebuild = True
        for ep in range(cfg.n_episodes):
            rebuilt = rebuild
            if rebuild:
                self._build(ep)
            closing = (ep + 1) % cfg.reset_frequency == 0 or ep == cfg.n_episodes - 1
            summary = self._run_episode(ep, closing_hint=closing, rebuilt=rebuilt)
            killed = self.ff.kill_switch if summary is None else summary.killed
            rebuild = closing or killed
        if self.engine is not None and self.engine_factory is not None:
            self.engine.close()


def continuous_training(engine, force_function: ForceFunction, config: TrainConfig, output_dir=None):
    trainer = ContinuousTrainer(force_function, config, engine=engine, output_dir=output_dir)
    return force_function, trainer.train()


def episodic_training(engine_factory, force_function: ForceFunction, config: TrainConfig, output_dir=None):
    trainer = EpisodicTrainer(force_function, config, engine_factory=engine_factory, output_dir=output_dir)
    return force_function, trainer.train()
