"""Value types shared by every part of the package."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

UNIT_TOL = 1e-9


def _vec3(values, name: str) -> np.ndarray:
    arr = np.zeros(3, dtype=np.float64)
    values = np.asarray(values, dtype=np.float64).ravel()
    if values.size not in (2, 3):
        raise ValueError(f"{name} must have 2 or 3 components, got {values.size}")
    arr[: values.size] = values
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True)
class Colloid:
    """Snapshot of a single particle.

    Vectors are always stored with three components; two-dimensional
    systems keep ``z = 0``.
    """

    pos: np.ndarray
    director: np.ndarray
    id: int
    velocity: np.ndarray = field(default_factory=lambda: np.zeros(3))
    type: int = 0

    def __post_init__(self):
        object.__setattr__(self, "pos", _vec3(self.pos, "pos"))
        object.__setattr__(self, "director", _vec3(self.director, "director"))
        object.__setattr__(self, "velocity", _vec3(self.velocity, "velocity"))
        object.__setattr__(self, "id", int(self.id))
        object.__setattr__(self, "type", int(self.type))

    def __eq__(self, other):
        if not isinstance(other, Colloid):
            return NotImplemented
        return (
            self.id == other.id
            and self.type == other.type
            and np.array_equal(self.pos, other.pos)
            and np.array_equal(self.director, other.director)
            and np.array_equal(self.velocity, other.velocity)
        )

    __hash__ = None


@dataclass(frozen=True)
class Action:
    """A control decision for one particle.

    ``force`` acts along the particle director. ``torque`` is interpreted
    as an angular drive (divided by the rotational friction). When
    ``new_direction`` is given, the director is set to it and the torque
    is ignored for that slice.
    """

    force: float = 0.0
    torque: np.ndarray = field(default_factory=lambda: np.zeros(3))
    new_direction: Optional[np.ndarray] = None

    def __post_init__(self):
        object.__setattr__(self, "force", float(self.force))
        object.__setattr__(self, "torque", _vec3(self.torque, "torque"))
        if self.new_direction is not None:
            nd = _vec3(self.new_direction, "new_direction")
            norm = float(np.linalg.norm(nd))
            if abs(norm - 1.0) > UNIT_TOL:
                raise ValueError(f"new_direction must be a unit vector (norm {norm!r})")
            object.__setattr__(self, "new_direction", nd)

    @property
    def is_noop(self) -> bool:
        return self.force == 0.0 and not self.torque.any() and self.new_direction is None

    def __eq__(self, other):
        if not isinstance(other, Action):
            return NotImplemented
        if (self.new_direction is None) != (other.new_direction is None):
            return False
        same_dir = self.new_direction is None or np.array_equal(
            self.new_direction, other.new_direction
        )
        return self.force == other.force and np.array_equal(self.torque, other.torque) and same_dir

    __hash__ = None


BOUNDARIES = ("reflecting", "periodic")


@dataclass(frozen=True)
class SimParams:
    """Physical and numerical constants of a simulation (reduced units)."""

    gamma_t: float = 1.0
    gamma_r: float = 1.0
    kT: float = 0.0
    dt: float = 0.01
    dim: int = 2
    box: Sequence[float] = (10.0, 10.0)
    steps_per_slice: int = 1
    boundary: str = "periodic"

    def __post_init__(self):
        for name in ("gamma_t", "gamma_r", "dt"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise ValueError(f"{name} must be strictly positive, got {value!r}")
        if not (math.isfinite(self.kT) and self.kT >= 0):
            raise ValueError(f"kT must be non-negative, got {self.kT!r}")
        if self.dim not in (2, 3):
            raise ValueError(f"dim must be 2 or 3, got {self.dim!r}")
        if int(self.steps_per_slice) != self.steps_per_slice or self.steps_per_slice < 1:
            raise ValueError(f"steps_per_slice must be an integer >= 1, got {self.steps_per_slice!r}")
        if self.boundary not in BOUNDARIES:
            raise ValueError(f"boundary must be one of {BOUNDARIES}, got {self.boundary!r}")
        box = tuple(float(b) for b in self.box)
        if len(box) != self.dim:
            raise ValueError(f"box must have {self.dim} lengths, got {len(box)}")
        if not all(math.isfinite(b) and b > 0 for b in box):
            raise ValueError(f"box lengths must be positive, got {box}")
        object.__setattr__(self, "box", box)
        object.__setattr__(self, "steps_per_slice", int(self.steps_per_slice))

    @property
    def box3(self) -> np.ndarray:
        """Box lengths padded to three axes (the unused z axis gets 0)."""
        out = np.zeros(3)
        out[: self.dim] = self.box
        return out

    @property
    def periodic(self) -> bool:
        return self.boundary == "periodic"
