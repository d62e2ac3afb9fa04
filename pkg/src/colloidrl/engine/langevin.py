"""Overdamped Langevin simulation engine."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Iterable, List, Optional, Sequence

import numpy as np

from ..core.rng import Purpose, stream_key
from ..core.types import Action, Colloid, SimParams
from . import kernels as _kernels
from ._kernels_py import OVERLAP_FLOOR, WCA_RCUT, _gaussians
from .base import ActionCardinalityError, Engine, NumericalBlowUp

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class Interactions:
    """WCA pair interaction settings."""

    enabled: bool = False
    sigma: float = 1.0
    epsilon: float = 1.0

    def __post_init__(self):
        if self.sigma <= 0 or self.epsilon < 0:
            raise ValueError("WCA sigma must be positive and epsilon non-negative")

    @property
    def cutoff(self) -> float:
        return WCA_RCUT * self.sigma


@dataclass(frozen=True)
class EngineState:
    colloids: List[Colloid]
    time: float
    params: SimParams
    interactions: Interactions = field(default_factory=Interactions)


def wca_pair_force(r_vec, sigma: float = 1.0, epsilon: float = 1.0):
    """Force on particle ``i`` from ``j`` given ``r_vec = r_j - r_i``.

    Returns ``(force, overlapped)``; separations below ``1e-6 sigma`` are
    clamped to that floor and reported as overlaps.
    """
    r_vec = np.asarray(r_vec, dtype=np.float64)
    r = float(np.linalg.norm(r_vec))
    if r >= WCA_RCUT * sigma:
        return np.zeros_like(r_vec), False
    overlapped = r < OVERLAP_FLOOR * sigma
    if overlapped:
        unit = r_vec / r if r > 0 else np.eye(r_vec.size)[0]
        r = OVERLAP_FLOOR * sigma
    else:
        unit = r_vec / r
    sr = sigma / r
    magnitude = 24.0 * epsilon * (2.0 * sr**13 - sr**7) / sigma
    return -magnitude * unit, overlapped


class LangevinEngine(Engine):
    """Euler-Maruyama integrator for active Brownian particles.

    Parameters
    ----------
    params : SimParams
    colloids : sequence of Colloid
        Initial configuration. Ids must be unique and non-negative.
    seed : int
        Root of every noise stream; each particle draws from its own
        counter-based stream keyed by its id.
    interactions : Interactions, optional
    rigid_types : iterable of int
        Species whose particles move together as one rigid body (2D only).
    backend : {"cython", "python"}, optional
        Kernel implementation; defaults to the compiled one when built.
    """

    def __init__(
        self,
        params: SimParams,
        colloids: Sequence[Colloid],
        seed: int = 0,
        interactions: Optional[Interactions] = None,
        rigid_types: Iterable[int] = (),
        backend: Optional[str] = None,
    ):
        self.params = params
        self.interactions = interactions or Interactions()
        self.seed = int(seed)
        self._k = _kernels.get_backend(backend)
        n = len(colloids)
        ids = [c.id for c in colloids]
        if len(set(ids)) != n:
            raise ValueError("colloid ids must be unique")
        if any(i < 0 for i in ids):
            raise ValueError("colloid ids must be non-negative")
        self.ids = np.array(ids, dtype=np.int64)
        self.types = np.array([c.type for c in colloids], dtype=np.int64)
        self.pos = np.ascontiguousarray([c.pos for c in colloids], dtype=np.float64).reshape(n, 3)
        self.director = np.ascontiguousarray([c.director for c in colloids], dtype=np.float64).reshape(n, 3)
        if params.dim == 2:
            self.pos[:, 2] = 0.0
            self.director[:, 2] = 0.0
        norms = np.linalg.norm(self.director, axis=1)
        if n and np.any(norms == 0):
            raise ValueError("director of zero norm")
        if n:
            self.director /= norms[:, None]
        self.velocity = np.zeros((n, 3))
        self.time = 0.0
        self.step_count = 0
        self.overlap_warnings = 0
        self._box3 = np.ascontiguousarray(params.box3)
        self._keys_t = np.array([stream_key(self.seed, i, Purpose.TRANSLATION) for i in ids], dtype=np.uint64)
        self._keys_r = np.array([stream_key(self.seed, i, Purpose.ROTATION) for i in ids], dtype=np.uint64)
        self._disp = np.zeros((n, 3))
        self._mobile = np.ones(n, dtype=np.uint8)
        self._bodies = []
        for t in sorted(set(rigid_types)):
            members = np.flatnonzero(self.types == t)
            if members.size == 0:
                continue
            if params.dim != 2:
                raise ValueError("rigid bodies are only supported in 2D")
            self._mobile[members] = 0
            self._bodies.append(members)
        self._validate_inside()

    @classmethod
    def from_state(cls, state: EngineState, seed: int = 0, **kwargs) -> "LangevinEngine":
        eng = cls(state.params, state.colloids, seed=seed, interactions=state.interactions, **kwargs)
        eng.time = state.time
        return eng

    @property
    def backend(self) -> str:
        return self._k.BACKEND

    @property
    def n_particles(self) -> int:
        return self.pos.shape[0]

    def _validate_inside(self):
        for ax in range(self.params.dim):
            L = self.params.box[ax]
            x = self.pos[:, ax]
            if np.any(x < 0) or np.any(x > L):
                raise ValueError(f"initial positions outside the box on axis {ax}")
            if self.params.periodic:
                self.pos[:, ax] = np.where(x >= L, 0.0, x)

    @property
    def state(self) -> EngineState:
        return EngineState(self.get_particle_data(), self.time, self.params, self.interactions)

    def get_particle_data(self) -> List[Colloid]:
        return [
            Colloid(
                pos=self.pos[i].copy(),
                director=self.director[i].copy(),
                id=int(self.ids[i]),
                velocity=self.velocity[i].copy(),
                type=int(self.types[i]),
            )
            for i in range(self.n_particles)
        ]

    def _action_arrays(self, actions: Sequence[Action]):
        n = self.n_particles
        if len(actions) != n:
            raise ActionCardinalityError(n, len(actions))
        f_act = np.empty(n)
        torque = np.zeros((n, 3))
        new_dir = np.zeros((n, 3))
        has_new = np.zeros(n, dtype=np.uint8)
        for i, a in enumerate(actions):
            f_act[i] = a.force
            torque[i] = a.torque
            if a.new_direction is not None:
                d = np.array(a.new_direction, dtype=np.float64)
                if self.params.dim == 2:
                    d[2] = 0.0
                norm = np.linalg.norm(d)
                if norm == 0.0:
                    raise ValueError("new_direction of zero norm")
                new_dir[i] = d / norm
                has_new[i] = 1
        if self.params.dim == 2:
            torque[:, :2] = 0.0
        return f_act, torque, new_dir, has_new

    def integrate(self, n_slices: int, force_model) -> bool:
        if int(n_slices) != n_slices or n_slices < 1:
            raise ValueError(f"n_slices must be a positive integer, got {n_slices!r}")
        for _ in range(int(n_slices)):
            actions = force_model.calc_action(self.get_particle_data())
            if getattr(force_model, "kill_switch", False):
                return True
            arrays = self._action_arrays(actions)
            for _ in range(self.params.steps_per_slice):
                self._step(*arrays)
        return False

    def run_passive(self, n_steps: int) -> None:
        """Integrate ``n_steps`` with no-op actions without building snapshots."""
        n = self.n_particles
        zeros = (np.zeros(n), np.zeros((n, 3)), np.zeros((n, 3)), np.zeros(n, dtype=np.uint8))
        for _ in range(int(n_steps)):
            self._step(*zeros)

    def interaction_forces(self) -> np.ndarray:
        if not self.interactions.enabled or self.n_particles < 2:
            return np.zeros((self.n_particles, 3))
        p = self.params
        forces, n_overlap = self._k.wca_forces(
            self.pos, self._box3, p.dim, p.periodic, self.interactions.sigma, self.interactions.epsilon
        )
        if n_overlap:
            self.overlap_warnings += int(n_overlap)
            log.warning("%d overlapping pairs clamped at step %d", n_overlap, self.step_count)
        return np.ascontiguousarray(forces)

    def _step(self, f_act, torque, new_dir, has_new):
        p = self.params
        f_int = self.interaction_forces()
        bad = self._k.langevin_step(
            self.pos, self.director, f_int, f_act, torque, new_dir, has_new, self._mobile,
            self._keys_t, self._keys_r, self.step_count, p.dim, p.dt, p.gamma_t, p.gamma_r,
            p.kT, self._box3, p.periodic, self._disp,
        )
        if bad >= 0:
            raise NumericalBlowUp(self.step_count, int(bad))
        for members in self._bodies:
            self._move_rigid(members, f_int)
        self.velocity[:] = self._disp / p.dt
        self.step_count += 1
        self.time += p.dt

    def _move_rigid(self, members: np.ndarray, f_int: np.ndarray):
        p = self.params
        anchor = self.pos[members[0]].copy()
        rel = self.pos[members] - anchor
        if p.periodic:
            L = self._box3[:2]
            rel[:, :2] -= L * np.ceil(rel[:, :2] / L - 0.5)
        com_rel = rel.mean(axis=0)
        arm = rel - com_rel
        force = f_int[members].sum(axis=0)
        torque_z = float(np.sum(arm[:, 0] * f_int[members, 1] - arm[:, 1] * f_int[members, 0]))
        n = members.size
        gamma_T = n * p.gamma_t
        gamma_R = p.gamma_t * float(np.sum(arm * arm)) + n * p.gamma_r
        shift = p.dt * force / gamma_T
        angle = p.dt * torque_z / gamma_R
        if p.kT > 0:
            key = np.array([self._keys_t[members[0]]], dtype=np.uint64)
            xi = _gaussians(key, self.step_count)[0]
            xi[2] = 0.0
            shift = shift + math.sqrt(2 * p.kT * p.dt / gamma_T) * xi
            key_r = np.array([self._keys_r[members[0]]], dtype=np.uint64)
            angle += math.sqrt(2 * p.kT * p.dt / gamma_R) * _gaussians(key_r, self.step_count)[0, 0]
        c, s = math.cos(angle), math.sin(angle)
        rot = np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])
        new_rel = com_rel + shift + arm @ rot.T
        new_pos = anchor + new_rel
        new_dir = self.director[members] @ rot.T
        if p.periodic:
            L = self._box3[:2]
            new_pos[:, :2] = np.mod(new_pos[:, :2], L)
            new_pos[:, :2] = np.where(new_pos[:, :2] >= L, 0.0, new_pos[:, :2])
        else:
            for ax in range(2):
                lo = new_pos[:, ax].min()
                hi = new_pos[:, ax].max()
                if lo < 0:
                    new_pos[:, ax] -= lo
                elif hi > p.box[ax]:
                    new_pos[:, ax] -= hi - p.box[ax]
        self._disp[members] = new_rel - rel
        self.pos[members] = new_pos
        self.director[members] = new_dir / np.linalg.norm(new_dir, axis=1)[:, None]
