"""Rule-based swarm agents."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, Optional, Sequence

import numpy as np

from ..core.geometry import minimum_image_displacement
from ..core.types import Action, Colloid
from ..objectives import Task
from .agents import ClassicalAgent


@dataclass(frozen=True)
class LymburnParams:
    """Coefficients of the flocking rule.

    ``r_repulse`` defaults to half the sensing radius and ``r_sense`` to a
    quarter of the smallest box edge when a box is known.
    """

    home: Sequence[float] = (0.0, 0.0, 0.0)
    a_align: float = 1.0
    a_repulse: float = 5.0
    a_attract: float = 0.5
    a_home: float = 0.2
    r_sense: Optional[float] = None
    r_repulse: Optional[float] = None
    f_max: float = 10.0

    def resolved(self, box=None) -> "LymburnParams":
        r_sense = self.r_sense
        if r_sense is None:
            if box is None:
                raise ValueError("r_sense is required when no box is given")
            r_sense = 0.25 * float(np.min(np.asarray(box, dtype=float)[np.asarray(box) > 0]))
        r_rep = self.r_repulse if self.r_repulse is not None else 0.5 * r_sense
        if r_sense <= 0 or r_rep < 0 or self.f_max < 0:
            raise ValueError("radii and f_max must be non-negative")
        return LymburnParams(self.home, self.a_align, self.a_repulse, self.a_attract, self.a_home,
                             float(r_sense), float(r_rep), self.f_max)


def lymburn_force(colloids: Sequence[Colloid], focal: Colloid, params: LymburnParams,
                  box=None, boundary: str = "reflecting", neighbor_types=None) -> Dict[str, np.ndarray]:
    """Terms of the swarm force on ``focal``.

    Returns
    -------
    dict
        ``align``, ``repulse``, ``attract``, ``home`` and their sum ``total``.
    """
    p = params.resolved(box)
    align = np.zeros(3)
    repulse = np.zeros(3)
    attract = np.zeros(3)
    for c in colloids:
        if c.id == focal.id or (neighbor_types is not None and c.type not in neighbor_types):
            continue
        # r_ij points from the neighbour to the focal particle
        r_ij = -minimum_image_displacement(focal.pos, c.pos, box, boundary) if box is not None else focal.pos - c.pos
        dist = float(np.linalg.norm(r_ij))
        if dist >= p.r_sense or dist == 0.0:
            continue
        unit = r_ij / dist
        align += c.velocity - focal.velocity
        if dist < p.r_repulse:
            repulse += unit
        attract -= unit
    home = np.zeros(3)
    h = np.asarray(p.home, dtype=float)
    home[: h.size] = h
    terms = {
        "align": p.a_align * align,
        "repulse": p.a_repulse * repulse,
        "attract": p.a_attract * attract,
        "home": p.a_home * (home - focal.pos),
    }
    terms["total"] = terms["align"] + terms["repulse"] + terms["attract"] + terms["home"]
    return terms


def lymburn_swarm_rule(colloids, focal: Colloid, params: LymburnParams, box=None,
                       boundary: str = "reflecting", neighbor_types=None) -> Action:
    total = lymburn_force(colloids, focal, params, box, boundary, neighbor_types)["total"]
    norm = float(np.linalg.norm(total))
    if norm == 0.0:
        return Action(force=0.0)
    return Action(force=min(norm, params.f_max), new_direction=total / norm)


class LymburnAgent(ClassicalAgent):
    """Flocking agents that align, keep a spacing and return to a home point.

    Parameters
    ----------
    particle_type : int
    params : LymburnParams
    box : sequence of float, optional
        Needed for periodic distances and for the default sensing radius.
    boundary : str
    neighbor_types : iterable of int, optional
        Species that count as neighbours; defaults to the agent's own species.
    task : Task, optional
        Evaluated every slice for reporting and kill conditions.
    """

    def __init__(self, particle_type: int = 0, params: LymburnParams = LymburnParams(), box=None,
                 boundary: str = "reflecting", neighbor_types=None, task: Optional[Task] = None):
        super().__init__(particle_type, task)
        self.params = params.resolved(box)
        self.box = None if box is None else np.asarray(box, dtype=float)
        self.boundary = boundary
        self.neighbor_types = {self.particle_type} if neighbor_types is None else set(neighbor_types)

    def compute_action(self, colloids, focal):
        return lymburn_swarm_rule(colloids, focal, self.params, self.box, self.boundary, self.neighbor_types)
