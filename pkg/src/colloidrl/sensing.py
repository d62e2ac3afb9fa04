"""Observables: what each agent senses of the system.

Every observable returns one row per particle of its ``particle_type``, in
the order those particles appear in the colloid list.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .core.geometry import minimum_image_displacement
from .core.types import Colloid


@dataclass(frozen=True)
class Segment:
    name: str
    offset: int
    length: int


@dataclass(frozen=True)
class ObservableVector:
    values: np.ndarray  # (n_particles, width)
    layout: Tuple[Segment, ...]

    @property
    def width(self) -> int:
        return self.values.shape[1]

    def segment(self, name: str) -> np.ndarray:
        for seg in self.layout:
            if seg.name == name:
                return self.values[:, seg.offset : seg.offset + seg.length]
        raise KeyError(name)


def select_type(colloids: Sequence[Colloid], particle_type: int) -> List[Colloid]:
    return [c for c in colloids if c.type == particle_type]


class Observable:
    """Parent class. Children implement :meth:`compute_observable`."""

    name = "observable"

    def __init__(self, particle_type: int = 0):
        self.particle_type = particle_type

    @property
    def size(self) -> int:
        raise NotImplementedError

    def compute_observable(self, colloids: Sequence[Colloid]) -> np.ndarray:
        raise NotImplementedError("Implemented in child class.")

    def reset(self) -> None:
        """Forget any history (called on environment reset)."""

    def __call__(self, colloids: Sequence[Colloid]) -> ObservableVector:
        values = np.asarray(self.compute_observable(colloids), dtype=np.float64)
        values = values.reshape(values.shape[0], -1)
        return ObservableVector(values, (Segment(self.name, 0, values.shape[1]),))


class PositionDirector(Observable):
    """Box-normalised position followed by the director.

    Positions map to ``[0, 1]`` per axis; directors are left as unit vectors.
    Width is ``2 * dim``.
    """

    name = "position_director"

    def __init__(self, box: Sequence[float], particle_type: int = 0):
        super().__init__(particle_type)
        self.box = np.asarray(box, dtype=np.float64)
        self.dim = self.box.size

    @property
    def size(self) -> int:
        return 2 * self.dim

    def compute_observable(self, colloids):
        agents = select_type(colloids, self.particle_type)
        out = np.empty((len(agents), self.size))
        for k, c in enumerate(agents):
            out[k, : self.dim] = c.pos[: self.dim] / self.box
            out[k, self.dim :] = c.director[: self.dim]
        return out

    def denormalize(self, values: np.ndarray) -> np.ndarray:
        return np.asarray(values)[..., : self.dim] * self.box


FIELD_FORMS = ("gaussian", "inverse_distance")


@dataclass(frozen=True)
class ConcentrationField:
    """A scalar field that is positive everywhere and peaks at ``source``.

    gaussian: ``A exp(-|r - s|^2 / (2 w^2))``
    inverse_distance: ``A / (|r - s| + w)``
    """

    source: Tuple[float, ...]
    decay: str = "gaussian"
    amplitude: float = 1.0
    width: float = 1.0

    def __post_init__(self):
        if self.decay not in FIELD_FORMS:
            raise ValueError(f"decay must be one of {FIELD_FORMS}")
        if self.amplitude <= 0 or self.width <= 0:
            raise ValueError("field amplitude and width must be positive")
        src = np.zeros(3)
        s = np.asarray(self.source, dtype=np.float64).ravel()
        src[: s.size] = s
        object.__setattr__(self, "source", tuple(float(x) for x in src))

    def __call__(self, pos) -> np.ndarray:
        pos = np.atleast_2d(np.asarray(pos, dtype=np.float64))
        d = pos[:, :3] - np.asarray(self.source)[: pos.shape[1]]
        r2 = np.einsum("ij,ij->i", d, d)
        if self.decay == "gaussian":
            return self.amplitude * np.exp(-r2 / (2.0 * self.width**2))
        return self.amplitude / (np.sqrt(r2) + self.width)


class ConcentrationChange(Observable):
    """Change of the field value at each particle since the previous call.

    The first call for a particle returns 0. Values are multiplied by
    ``scale`` so that typical changes are of order one.
    """

    name = "concentration_change"

    def __init__(self, field: ConcentrationField, particle_type: int = 0, scale: float = 1.0):
        super().__init__(particle_type)
        self.field = field
        self.scale = scale
        self._history: Dict[int, float] = {}

    @property
    def size(self) -> int:
        return 1

    def reset(self):
        self._history.clear()

    def compute_observable(self, colloids):
        agents = select_type(colloids, self.particle_type)
        if not agents:
            return np.zeros((0, 1))
        c = self.field(np.array([a.pos for a in agents]))
        out = np.empty((len(agents), 1))
        for k, a in enumerate(agents):
            prev = self._history.get(a.id)
            out[k, 0] = 0.0 if prev is None else self.scale * (c[k] - prev)
            self._history[a.id] = float(c[k])
        return out


class ConcentrationValue(Observable):
    """Field value at each particle, times ``scale``. Stateless."""

    name = "concentration"

    def __init__(self, field: ConcentrationField, particle_type: int = 0, scale: float = 1.0):
        super().__init__(particle_type)
        self.field = field
        self.scale = scale

    @property
    def size(self) -> int:
        return 1

    def compute_observable(self, colloids):
        agents = select_type(colloids, self.particle_type)
        if not agents:
            return np.zeros((0, 1))
        return self.scale * self.field(np.array([a.pos for a in agents]))[:, None]


def cone_index(angle: float, n_cones: int) -> int:
    """Sector of a signed angle relative to the director.

    Sector 0 is centred on the director and sectors increase
    counter-clockwise. An angle exactly on a boundary belongs to the
    lower-index sector.
    """
    w = 2.0 * math.pi / n_cones
    x = math.fmod(angle + 0.5 * w, 2.0 * math.pi)
    if x < 0:
        x += 2.0 * math.pi
    if x == 0.0:
        return 0
    return min(int(math.ceil(x / w)) - 1, n_cones - 1)


class VisionCones(Observable):
    """Neighbour counts per angular sector around the director (2D).

    Counts particles within ``radius`` (strictly closer) of the focal
    particle. With ``observed_types`` the output is ``[sector][type]``
    row-major, otherwise one count per sector. Counts are not normalised.
    ``field_of_view`` (radians, default full circle) drops neighbours whose
    angle from the director exceeds half of it.
    """

    name = "vision_cones"

    def __init__(
        self,
        box: Sequence[float],
        n_cones: int = 5,
        radius: Optional[float] = None,
        observed_types: Optional[Sequence[int]] = None,
        particle_type: int = 0,
        boundary: str = "periodic",
        field_of_view: float = 2.0 * math.pi,
    ):
        super().__init__(particle_type)
        self.box = np.asarray(box, dtype=np.float64)
        if self.box.size != 2:
            raise ValueError("vision cones are defined for 2D systems only")
        if n_cones < 1:
            raise ValueError("n_cones must be >= 1")
        self.n_cones = int(n_cones)
        self.radius = float(radius) if radius is not None else float(self.box.min()) / 4.0
        if self.radius <= 0:
            raise ValueError("radius must be positive")
        self.observed_types = None if observed_types is None else list(observed_types)
        self.boundary = boundary
        self.field_of_view = field_of_view

    @property
    def size(self) -> int:
        return self.n_cones * (1 if self.observed_types is None else len(self.observed_types))

    def for_focal(self, colloids, focal: Colloid) -> np.ndarray:
        n_t = 1 if self.observed_types is None else len(self.observed_types)
        counts = np.zeros((self.n_cones, n_t))
        e = focal.director
        for other in colloids:
            if other.id == focal.id:
                continue
            if self.observed_types is None:
                col = 0
            elif other.type in self.observed_types:
                col = self.observed_types.index(other.type)
            else:
                continue
            d = minimum_image_displacement(focal.pos[:2], other.pos[:2], self.box, self.boundary)
            dist = math.hypot(d[0], d[1])
            if dist >= self.radius or dist == 0.0:
                continue
            angle = math.atan2(e[0] * d[1] - e[1] * d[0], e[0] * d[0] + e[1] * d[1])
            if abs(angle) > 0.5 * self.field_of_view:
                continue
            counts[cone_index(angle, self.n_cones), col] += 1
        return counts.ravel()

    def compute_observable(self, colloids):
        agents = select_type(colloids, self.particle_type)
        out = np.zeros((len(agents), self.size))
        for k, a in enumerate(agents):
            out[k] = self.for_focal(colloids, a)
        return out


class MultiSensing(Observable):
    """Concatenates several observables in declaration order."""

    name = "multi_sensing"

    def __init__(self, observables: Sequence[Observable]):
        if not observables:
            raise ValueError("MultiSensing needs at least one observable")
        super().__init__(observables[0].particle_type)
        self.observables = list(observables)

    @property
    def size(self) -> int:
        return sum(o.size for o in self.observables)

    def reset(self):
        for o in self.observables:
            o.reset()

    def __call__(self, colloids) -> ObservableVector:
        parts, layout, offset = [], [], 0
        for obs in self.observables:
            v = np.asarray(obs.compute_observable(colloids), dtype=np.float64)
            v = v.reshape(v.shape[0], -1)
            if parts and v.shape[0] != parts[0].shape[0]:
                raise ValueError(
                    f"observable {obs.name!r} returned {v.shape[0]} rows, expected {parts[0].shape[0]}"
                )
            parts.append(v)
            layout.append(Segment(obs.name, offset, v.shape[1]))
            offset += v.shape[1]
        return ObservableVector(np.concatenate(parts, axis=1), tuple(layout))

    def compute_observable(self, colloids):
        return self(colloids).values
