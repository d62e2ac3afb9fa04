import numpy as np
import pytest

from colloidrl.control import ActorCriticAgent, ForceFunction, LymburnAgent, LymburnParams, TrajectoryBuffer
from colloidrl.core import Action, SimParams
from colloidrl.core.rng import derive_seed
from colloidrl.engine import LangevinEngine, random_colloids
from colloidrl.learn import ActorCritic, UpdateConfig
from colloidrl.objectives import Task
from colloidrl.orchestrate import (
    FOOTER,
    REWARD_HEADER,
    TRAJECTORY_HEADER,
    ContinuousTrainer,
    EpisodicTrainer,
    TrainConfig,
    TrainingError,
    read_csv,
    record_episode,
)
from colloidrl.sensing import PositionDirector

PARAMS = SimParams(kT=0.1, dt=0.01, dim=2, box=(10.0, 10.0), steps_per_slice=2)


class Scripted(Task):
    """Constant reward; raises the kill on a given global call number.

    The call counter survives ``reset`` so the kill lands in a chosen
    episode whatever the loop does in between.
    """

    def __init__(self, reward=1.0, kill_on_call=None, particle_type=0):
        super().__init__(particle_type)
        self.reward = reward
        self.kill_on_call = kill_on_call
        self.calls = 0

    def __call__(self, colloids):
        self.calls += 1
        if self.calls == self.kill_on_call:
            self._raise_kill()
        n = sum(c.type == self.particle_type for c in colloids)
        return np.full(n, self.reward)


class Factory:
    def __init__(self, n=3):
        self.n = n
        self.seeds = []

    def __call__(self, seed):
        self.seeds.append(seed)
        return LangevinEngine(PARAMS, random_colloids(PARAMS, [(0, self.n)], seed), seed=seed)


def force_function(task=None, lr=1e-3):
    obs = PositionDirector(PARAMS.box, 0)
    actions = {"stay": Action(), "push": Action(force=1.0)}
    agent = ActorCriticAgent(0, ActorCritic(obs.size, 2, (4,), seed=1), task or Scripted(), obs, actions,
                             UpdateConfig(learning_rate=lr), seed=2)
    return ForceFunction({0: agent})


def kill_call(episode, length, slice_in_episode=3):
    # each episode calls the task once per slice plus once when it is closed
    return (episode - 1) * (length + 1) + slice_in_episode


def test_negative_episodes_rejected():
    with pytest.raises(ValueError, match="n_episodes"):
        TrainConfig(n_episodes=-1)
    with pytest.raises(ValueError, match="reset_frequency"):
        TrainConfig(reset_frequency=0)


def test_zero_episodes_no_updates():
    ff = force_function()
    engine = Factory()(0)
    history = ContinuousTrainer(ff, TrainConfig("continuous", n_episodes=0), engine=engine).train()
    assert history == [] and ff.agents[0].update_count == 0


def test_classical_system_performs_no_updates():
    agent = LymburnAgent(0, LymburnParams(home=(5, 5)), PARAMS.box)
    ff = ForceFunction({0: agent})
    trainer = ContinuousTrainer(ff, TrainConfig("continuous", n_episodes=3, episode_length=4), engine=Factory()(0))
    trainer.train()
    assert trainer.update_counts == {}
    # episodes still complete, they just carry no species statistics
    assert [s.species for s in trainer.history] == [{}, {}, {}]
    assert trainer.engine.step_count == 3 * 4 * PARAMS.steps_per_slice


@pytest.mark.parametrize("k", [1, 4])
def test_continuous_kill_ends_training(k):
    L = 5
    ff = force_function(Scripted(kill_on_call=kill_call(k, L)))
    trainer = ContinuousTrainer(ff, TrainConfig("continuous", n_episodes=10, episode_length=L),
                                engine=Factory()(0))
    history = trainer.train()
    assert len(history) == k
    assert history[-1].killed and not any(s.killed for s in history[:-1])
    assert trainer.update_counts[0] == k


def test_continuous_never_rebuilds():
    factory = Factory()
    engine = factory(0)
    ff = force_function()
    ContinuousTrainer(ff, TrainConfig("continuous", n_episodes=4, episode_length=3), engine=engine).train()
    assert len(factory.seeds) == 1
    assert engine.step_count == 4 * 3 * PARAMS.steps_per_slice


def test_fully_episodic_rebuilds_every_episode():
    factory = Factory()
    history = EpisodicTrainer(force_function(), TrainConfig(n_episodes=4, episode_length=3, seed=9),
                              engine_factory=factory).train()
    assert all(s.rebuilt for s in history)
    assert factory.seeds == [derive_seed(9, e) for e in range(4)]


def test_semi_episodic_rebuild_schedule():
    factory = Factory(n=2)
    cfg = TrainConfig(n_episodes=65, episode_length=2, reset_frequency=30)
    history = EpisodicTrainer(force_function(), cfg, engine_factory=factory).train()
    assert [s.episode for s in history if s.rebuilt] == [0, 30, 60]
    assert len(factory.seeds) == 3


def test_kill_triggers_immediate_rebuild():
    L = 4
    factory = Factory()
    ff = force_function(Scripted(kill_on_call=kill_call(7, L)))
    cfg = TrainConfig(n_episodes=12, episode_length=L, reset_frequency=30)
    history = EpisodicTrainer(ff, cfg, engine_factory=factory).train()
    assert len(history) == 12
    assert [s.episode for s in history if s.killed] == [6]
    # the seventh episode is index 6; the rebuild happens right after it
    assert [s.episode for s in history if s.rebuilt] == [0, 7]


def test_buffers_start_empty_after_reset():
    seen = []

    class Spy(Scripted):
        def __call__(self, colloids):
            seen.append(len(agent.buffer))
            return super().__call__(colloids)

    ff = force_function(Spy())
    agent = ff.agents[0]
    EpisodicTrainer(ff, TrainConfig(n_episodes=3, episode_length=2), engine_factory=Factory()).train()
    # the first call of every episode finds an empty buffer
    assert seen[0::3] == [0, 0, 0]


def test_update_count_matches_episodes():
    ff = force_function()
    trainer = EpisodicTrainer(ff, TrainConfig(n_episodes=5, episode_length=2), engine_factory=Factory())
    trainer.train()
    assert trainer.update_counts[0] == 5 == ff.agents[0].update_count


def test_factory_failure_has_context():
    def broken(seed):
        raise RuntimeError("no lab today")

    with pytest.raises(TrainingError, match="episode 0: failed to build environment: no lab today"):
        EpisodicTrainer(force_function(), TrainConfig(n_episodes=1), engine_factory=broken).train()


def test_constant_reward_cumulates():
    buf = TrajectoryBuffer()
    for _ in range(50):
        buf.record_decision(np.zeros((2, 1)), [0, 0], [0.0, 0.0], [0.0, 0.0])
        buf.record_outcome([1.0, 1.0])
    s = record_episode({0: buf}).species[0]
    assert s.cum_reward == 50.0 and s.mean_reward == 1.0 and s.n_slices == 50


def test_empty_episode_rejected():
    with pytest.raises(ValueError, match="empty episode"):
        record_episode({0: TrajectoryBuffer()})


def test_pending_buffer_rejected():
    buf = TrajectoryBuffer()
    buf.record_decision(np.zeros((1, 1)), [0], [0.0], [0.0])
    with pytest.raises(ValueError, match="not aligned"):
        record_episode({0: buf})


def test_summary_matches_persisted_csv(tmp_path):
    rng = np.random.default_rng(3)
    rows = rng.normal(size=(8, 3))

    class Replay(Task):
        def __init__(self):
            super().__init__(0)
            self.k = 0

        def __call__(self, colloids):
            r = rows[self.k % len(rows)]
            self.k += 1
            return r

    trainer = EpisodicTrainer(force_function(Replay()), TrainConfig(n_episodes=3, episode_length=3),
                              engine_factory=Factory(), output_dir=tmp_path)
    history = trainer.train()
    data = read_csv(tmp_path / "rewards.csv")
    assert data["complete"] and data["n_rows"] == 3
    # independent recomputation: each episode sees 4 task calls, the first unscored
    for e in range(3):
        scored = rows[[(4 * e + j) % 8 for j in range(1, 4)]]
        assert data["cum_reward"][e] == pytest.approx(scored.sum(axis=0).mean(), abs=1e-12)
        assert data["mean_reward"][e] == history[e].species[0].mean_reward
        assert data["cum_reward"][e] == history[e].species[0].cum_reward


def test_output_files_and_footer(tmp_path):
    cfg = TrainConfig(n_episodes=2, episode_length=3, checkpoint_every=1)
    EpisodicTrainer(force_function(), cfg, engine_factory=Factory(n=4), output_dir=tmp_path).train()
    traj = (tmp_path / "trajectory.csv").read_text().splitlines()
    assert traj[0] == ",".join(TRAJECTORY_HEADER) and traj[-1] == FOOTER
    assert (tmp_path / "rewards.csv").read_text().splitlines()[0] == ",".join(REWARD_HEADER)
    # 4 particles, 3 decision snapshots plus the closing state per episode
    assert read_csv(tmp_path / "trajectory.csv")["n_rows"] == 2 * 4 * 4
    assert (tmp_path / "checkpoints" / "species_0.json").exists()


def test_interrupt_closes_cleanly(tmp_path):
    class Interrupt(Scripted):
        def __call__(self, colloids):
            if self.calls == 5:
                raise KeyboardInterrupt
            return super().__call__(colloids)

    trainer = EpisodicTrainer(force_function(Interrupt()), TrainConfig(n_episodes=3, episode_length=3),
                              engine_factory=Factory(), output_dir=tmp_path)
    trainer.train()
    assert trainer.interrupted
    assert (tmp_path / "rewards.csv").read_text().splitlines()[-1] == FOOTER
    assert (tmp_path / "checkpoints" / "species_0.json").exists()


def test_failure_leaves_no_footer(tmp_path):
    class Broken(Scripted):
        def __call__(self, colloids):
            raise RuntimeError("sensor fault")

    with pytest.raises(RuntimeError):
        EpisodicTrainer(force_function(Broken()), TrainConfig(n_episodes=1, episode_length=2),
                        engine_factory=Factory(), output_dir=tmp_path).train()
    assert FOOTER not in (tmp_path / "rewards.csv").read_text()


def test_same_seed_same_history():
    def run():
        h = EpisodicTrainer(force_function(lr=0.05), TrainConfig(n_episodes=4, episode_length=3, seed=4),
                            engine_factory=Factory()).train()
        return [s.reward_rows() for s in h]

    assert run() == run()
