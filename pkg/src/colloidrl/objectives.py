"""Tasks: per-agent rewards and the kill switch.

Large positive rewards mean the task is being achieved. A task's kill
switch latches: once raised it stays raised until :meth:`Task.reset`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Dict, Optional, Sequence

import numpy as np

from .core.geometry import minimum_image_displacement
from .core.types import Colloid
from .sensing import ConcentrationField, select_type

REWARD_MODES = ("individual", "team_average")


@dataclass(frozen=True)
class TaskOutput:
    rewards: np.ndarray
    kill: bool


def aggregate_rewards(rewards, mode: str = "individual") -> np.ndarray:
    """Apply the cooperative reward setting.

    ``team_average`` gives every agent the arithmetic mean of all rewards.
    """
    r = np.asarray(rewards, dtype=np.float64)
    if r.size == 0:
        raise ValueError("cannot aggregate an empty reward list")
    if mode == "individual":
        return r.copy()
    if mode == "team_average":
        return np.full_like(r, r.mean())
    raise ValueError(f"unknown reward mode {mode!r}; expected one of {REWARD_MODES}")


class Task:
    """Parent class for reward functions."""

    def __init__(self, particle_type: int = 0):
        self.particle_type = particle_type
        self._kill = False

    @property
    def kill_switch(self) -> bool:
        return self._kill

    def _raise_kill(self, flag: bool = True):
        self._kill = self._kill or bool(flag)

    def reset(self) -> None:
        self._kill = False

    def __call__(self, colloids: Sequence[Colloid]) -> np.ndarray:
        raise NotImplementedError("Implemented in child class.")

    def evaluate(self, colloids: Sequence[Colloid]) -> TaskOutput:
        rewards = np.asarray(self(colloids), dtype=np.float64)
        if not np.all(np.isfinite(rewards)):
            raise ValueError(f"{type(self).__name__} produced non-finite rewards")
        return TaskOutput(rewards, self.kill_switch)


def principal_angle(points: np.ndarray) -> float:
    """Orientation in ``[0, pi)`` of the principal axis of 2D points."""
    centred = points - points.mean(axis=0)
    cov = centred.T @ centred
    w, v = np.linalg.eigh(cov)
    axis = v[:, np.argmax(w)]
    return math.atan2(axis[1], axis[0]) % math.pi


def wrap_half_pi(delta: float) -> float:
    """Wrap an axis-angle difference to ``[-pi/2, pi/2)``."""
    return (delta + 0.5 * math.pi) % math.pi - 0.5 * math.pi


class RotateRod(Task):
    """Rewards rotation of a rod made of particles of type ``rod_type``.

    Each agent receives ``scale * direction * dtheta`` where ``dtheta`` is
    the signed change of the rod's principal axis since the previous call
    (0 on the first call). ``direction=+1`` rewards counter-clockwise
    rotation.
    """

    def __init__(
        self,
        rod_type: int = 1,
        particle_type: int = 0,
        scale: float = 1.0,
        direction: int = 1,
        box: Optional[Sequence[float]] = None,
        boundary: str = "reflecting",
        colloids: Optional[Sequence[Colloid]] = None,
    ):
        super().__init__(particle_type)
        if direction not in (1, -1):
            raise ValueError("direction must be +1 or -1")
        self.rod_type = rod_type
        self.scale = scale
        self.direction = direction
        self.box = None if box is None else np.asarray(box, dtype=np.float64)[:2]
        self.boundary = boundary
        self._previous: Optional[float] = None
        if colloids is not None:
            self._rod_points(colloids)

    def reset(self):
        super().reset()
        self._previous = None

    def _rod_points(self, colloids) -> np.ndarray:
        rod = select_type(colloids, self.rod_type)
        if len(rod) < 2:
            raise ValueError(f"rod species {self.rod_type} absent or has fewer than two particles")
        pts = np.array([c.pos[:2] for c in rod])
        if self.box is not None and self.boundary == "periodic":
            pts = pts[0] + minimum_image_displacement(pts[0], pts, self.box, "periodic")
        return pts

    def rod_angle(self, colloids) -> float:
        return principal_angle(self._rod_points(colloids))

    def __call__(self, colloids):
        angle = self.rod_angle(colloids)
        n = len(select_type(colloids, self.particle_type))
        if self._previous is None:
            delta = 0.0
        else:
            delta = wrap_half_pi(angle - self._previous)
        self._previous = angle
        return np.full(n, self.scale * self.direction * delta)


class GradientTask(Task):
    """Chemotaxis: reward for climbing a concentration field.

    ``scale * max(0, c_t - c_{t-1})`` per particle, or the signed change
    when ``clip=False``. The first call for a particle gives 0.
    """

    def __init__(self, field: ConcentrationField, particle_type: int = 0, scale: float = 1.0, clip: bool = True):
        super().__init__(particle_type)
        self.field = field
        self.scale = scale
        self.clip = clip
        self._history: Dict[int, float] = {}

    def reset(self):
        super().reset()
        self._history.clear()

    def __call__(self, colloids):
        agents = select_type(colloids, self.particle_type)
        if not agents:
            return np.zeros(0)
        c = self.field(np.array([a.pos for a in agents]))
        out = np.zeros(len(agents))
        for k, a in enumerate(agents):
            prev = self._history.get(a.id)
            if prev is not None:
                delta = c[k] - prev
                out[k] = self.scale * (max(0.0, delta) if self.clip else delta)
            self._history[a.id] = float(c[k])
        return out


class Multitasking(Task):
    """Weighted sum of several tasks; the kill switch is their logical OR."""

    def __init__(self, tasks: Sequence[Task], weights: Optional[Sequence[float]] = None):
        if not tasks:
            raise ValueError("Multitasking needs at least one task")
        super().__init__(tasks[0].particle_type)
        weights = [1.0] * len(tasks) if weights is None else list(weights)
        if len(weights) != len(tasks):
            raise ValueError(f"got {len(weights)} weights for {len(tasks)} tasks")
        self.tasks = list(tasks)
        self.weights = [float(w) for w in weights]

    @property
    def kill_switch(self) -> bool:
        return self._kill or any(t.kill_switch for t in self.tasks)

    def reset(self):
        super().reset()
        for t in self.tasks:
            t.reset()

    def __call__(self, colloids):
        total = None
        for task, w in zip(self.tasks, self.weights):
            r = np.asarray(task(colloids), dtype=np.float64)
            if total is None:
                total = w * r
            elif r.shape != total.shape:
                raise ValueError("sub-tasks returned different numbers of rewards")
            else:
                total = total + w * r
        self._raise_kill(any(t.kill_switch for t in self.tasks))
        return total


@dataclass(frozen=True)
class KillConditions:
    """Predicates that end a run. Unset fields are ignored.

    ``safe_region`` is ``[[lo, hi], ...]`` per axis; any particle (of any
    type) outside it triggers the switch. ``success_threshold`` triggers
    when the mean field value over ``particle_type`` reaches it.
    """

    max_slices: Optional[int] = None
    safe_region: Optional[Sequence[Sequence[float]]] = None
    field: Optional[ConcentrationField] = None
    success_threshold: Optional[float] = None
    particle_type: int = 0


def kill_switch_condition(colloids: Sequence[Colloid], conditions: KillConditions, n_slices: int = 0) -> bool:
    if conditions.max_slices is not None and n_slices >= conditions.max_slices:
        return True
    if conditions.safe_region is not None and colloids:
        region = np.asarray(conditions.safe_region, dtype=np.float64)
        pos = np.array([c.pos[: region.shape[0]] for c in colloids])
        if np.any(pos < region[:, 0]) or np.any(pos > region[:, 1]):
            return True
    if conditions.success_threshold is not None:
        if conditions.field is None:
            raise ValueError("success_threshold requires a field")
        agents = select_type(colloids, conditions.particle_type)
        if agents:
            values = conditions.field(np.array([a.pos for a in agents]))
            if float(values.mean()) >= conditions.success_threshold:
                return True
    return False


class KillSwitchTask(Task):
    """Zero-reward task that raises the kill switch on :class:`KillConditions`.

    Combine with a rewarding task through :class:`Multitasking`.
    """

    def __init__(self, conditions: KillConditions, particle_type: int = 0):
        super().__init__(particle_type)
        self.conditions = conditions
        self._calls = 0

    def reset(self):
        super().reset()
        self._calls = 0

    def __call__(self, colloids):
        self._calls += 1
        self._raise_kill(kill_switch_condition(colloids, self.conditions, self._calls))
        return np.zeros(len(select_type(colloids, self.particle_type)))
