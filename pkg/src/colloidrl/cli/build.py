"""Turn a validated configuration into engines, agents and a trainer."""

from __future__ import annotations

import os
from pathlib import Path
from typing import Callable, List, Optional

import numpy as np

from ..control import ActorCriticAgent, ForceFunction, LymburnAgent, LymburnParams
from ..core.rng import derive_seed
from ..core.types import Action, Colloid, SimParams
from ..engine import Interactions, LangevinEngine
from ..engine.placement import random_colloids, rod_colloids
from ..learn import ActorCritic, RandomExploration, RNDReward, UpdateConfig
from ..objectives import GradientTask, KillConditions, KillSwitchTask, Multitasking, RotateRod
from ..orchestrate import ContinuousTrainer, EpisodicTrainer, TrainConfig
from ..remote import RemoteEngine
from ..sensing import (
    ConcentrationChange,
    ConcentrationField,
    ConcentrationValue,
    MultiSensing,
    PositionDirector,
    VisionCones,
)
from .config import ExperimentConfig, ObservableSpec, TaskSpec, parse_address

OUTPUT_ROOT_ENV = "COLLOIDRL_OUTPUT_ROOT"


def sim_params(cfg: ExperimentConfig) -> SimParams:
    s = cfg.system
    return SimParams(s.gamma_t, s.gamma_r, s.kT, s.dt, s.dim, tuple(s.box), s.steps_per_slice, s.boundary)


def make_field(cfg: ExperimentConfig) -> Optional[ConcentrationField]:
    f = cfg.field
    if f is None:
        return None
    return ConcentrationField(tuple(f.source), f.decay, f.amplitude, f.width)


def initial_colloids(cfg: ExperimentConfig, seed: int) -> List[Colloid]:
    params = sim_params(cfg)
    placed: List[Colloid] = []
    for k, sp in enumerate(cfg.system.species):
        if sp.count == 0:
            continue
        if sp.placement == "rod":
            placed += rod_colloids(sp.count, sp.center, sp.spacing, sp.angle, sp.type, start_id=len(placed))
        else:
            placed += random_colloids(params, [(sp.type, sp.count)], derive_seed(seed, k), sp.min_separation,
                                      sp.region, start_id=len(placed), existing=placed)
    return placed


def engine_factory(cfg: ExperimentConfig, force_local: bool = False) -> Callable[[int], object]:
    e = cfg.engine
    if e.kind == "remote" and not force_local:
        address = parse_address(e.address)
        return lambda seed: RemoteEngine(address, e.timeout, seed)
    params = sim_params(cfg)
    inter = Interactions(cfg.system.interactions, cfg.system.sigma, cfg.system.epsilon)

    def factory(seed):
        return LangevinEngine(params, initial_colloids(cfg, seed), seed=seed, interactions=inter,
                              rigid_types=cfg.system.rigid_types, backend=e.backend)

    return factory


def make_observable(spec: ObservableSpec, cfg: ExperimentConfig, ptype: int):
    box = cfg.system.box
    if spec.kind == "position_director":
        return PositionDirector(box, ptype)
    if spec.kind == "concentration_change":
        return ConcentrationChange(make_field(cfg), ptype, spec.scale)
    if spec.kind == "concentration_value":
        return ConcentrationValue(make_field(cfg), ptype, spec.scale)
    if spec.kind == "vision_cones":
        return VisionCones(box, spec.n_cones, spec.radius, spec.observed_types, ptype,
                           cfg.system.boundary, spec.field_of_view)
    return MultiSensing([make_observable(p, cfg, ptype) for p in spec.parts])


def make_task(spec: TaskSpec, cfg: ExperimentConfig, ptype: int):
    if spec.kind == "gradient":
        return GradientTask(make_field(cfg), ptype, spec.scale, spec.clip)
    if spec.kind == "rotate_rod":
        return RotateRod(spec.rod_type, ptype, spec.scale, spec.direction, cfg.system.box, cfg.system.boundary)
    if spec.kind == "kill":
        cond = KillConditions(spec.max_slices, spec.safe_region, make_field(cfg), spec.success_threshold, ptype)
        return KillSwitchTask(cond, ptype)
    return Multitasking([make_task(p, cfg, ptype) for p in spec.parts], spec.weights)


def make_force_function(cfg: ExperimentConfig, seed: Optional[int] = None) -> ForceFunction:
    seed = cfg.seed if seed is None else seed
    upd = UpdateConfig(**cfg.training.update.model_dump())
    agents = {}
    for spec in cfg.agents:
        t = spec.type
        if spec.kind == "classical":
            lp = spec.lymburn
            params = LymburnParams(tuple(lp.home), lp.a_align, lp.a_repulse, lp.a_attract, lp.a_home,
                                   lp.r_sense, lp.r_repulse, lp.f_max)
            task = make_task(spec.task, cfg, t) if spec.task is not None else None
            agents[t] = LymburnAgent(t, params, cfg.system.box, cfg.system.boundary, task=task)
            continue
        obs = make_observable(spec.observable, cfg, t)
        actions = {name: Action(a.force, a.torque, a.new_direction) for name, a in spec.actions.items()}
        net = ActorCritic(obs.size, len(actions), tuple(spec.network.hidden), spec.network.architecture,
                          derive_seed(seed, t), spec.network.actor_gain)
        exploration = None
        if spec.exploration is not None:
            exploration = RandomExploration(spec.exploration.zeta0, spec.exploration.decay,
                                            cfg.training.episode_length)
        intrinsic = None
        if spec.intrinsic is not None:
            i = spec.intrinsic
            intrinsic = RNDReward(obs.size, tuple(i.hidden), i.embedding, i.lr, "adam", i.train_steps,
                                  derive_seed(seed, t, 1))
        agents[t] = ActorCriticAgent(t, net, make_task(spec.task, cfg, t), obs, actions, upd, exploration,
                                     intrinsic, spec.reward_mode, seed)
    return ForceFunction(agents, cfg.system.passive)


def output_directory(cfg: ExperimentConfig) -> Path:
    d = Path(cfg.output.directory)
    root = os.environ.get(OUTPUT_ROOT_ENV)
    if root and not d.is_absolute():
        d = Path(root) / d
    return d


def make_trainer(cfg: ExperimentConfig, seed: Optional[int] = None, output_dir=None):
    seed = cfg.seed if seed is None else seed
    tc = cfg.training
    train_cfg = TrainConfig(tc.mode, tc.n_episodes, tc.episode_length, tc.reset_frequency, seed,
                            tc.checkpoint_every, cfg.output.trajectory_every)
    ff = make_force_function(cfg, seed)
    factory = engine_factory(cfg)
    out = output_dir if output_dir is not None else output_directory(cfg)
    if tc.mode == "continuous":
        return ContinuousTrainer(ff, train_cfg, engine=factory(derive_seed(seed, 0)), output_dir=out,
                                 write_trajectory=cfg.output.trajectory)
    return EpisodicTrainer(ff, train_cfg, engine_factory=factory, output_dir=out,
                           write_trajectory=cfg.output.trajectory)


def serve_factory(cfg: ExperimentConfig, seed: Optional[int] = None):
    """Engine factory for ``serve``: hellos without a seed get the run seed."""
    base = engine_factory(cfg, force_local=True)
    default = derive_seed(cfg.seed if seed is None else seed, 0)
    return lambda s: base(default if s is None else s)


__all__ = [
    "engine_factory",
    "initial_colloids",
    "make_force_function",
    "make_trainer",
    "output_directory",
    "serve_factory",
    "sim_params",
]
