"""Initial configurations."""

from __future__ import annotations

import math
from typing import List, Optional, Sequence, Tuple

import numpy as np

from ..core.rng import Purpose, RngStream
from ..core.types import Colloid, SimParams


def random_colloids(
    params: SimParams,
    counts: Sequence[Tuple[int, int]],
    seed: int,
    min_separation: float = 0.0,
    region: Optional[Sequence[Sequence[float]]] = None,
    start_id: int = 0,
    existing: Sequence[Colloid] = (),
    max_tries: int = 1000,
) -> List[Colloid]:
    """Uniformly placed particles with random directors.

    ``counts`` is a list of ``(type, count)`` pairs. ``region`` optionally
    restricts placement to ``[[lo, hi], ...]`` per axis. With
    ``min_separation > 0`` positions are drawn by rejection against every
    particle placed so far (including ``existing``).
    """
    rng = RngStream(seed, 0, Purpose.PLACEMENT)
    dim = params.dim
    lo = np.zeros(dim)
    hi = np.array(params.box, dtype=np.float64)
    if region is not None:
        reg = np.asarray(region, dtype=np.float64)
        lo, hi = np.maximum(lo, reg[:dim, 0]), np.minimum(hi, reg[:dim, 1])
    placed = [c.pos[:dim] for c in existing]
    out: List[Colloid] = []
    next_id = start_id
    box = np.array(params.box)
    for ptype, count in counts:
        for _ in range(int(count)):
            for _attempt in range(max_tries):
                p = lo + (hi - lo) * rng.uniform(dim)
                if params.periodic:
                    p = np.where(p >= box, 0.0, p)
                if min_separation <= 0 or not placed:
                    break
                d = np.asarray(placed) - p
                if params.periodic:
                    d -= box * np.ceil(d / box - 0.5)
                if np.min(np.einsum("ij,ij->i", d, d)) >= min_separation**2:
                    break
            else:
                raise RuntimeError("could not place particles; box too crowded for min_separation")
            placed.append(p)
            if dim == 2:
                theta = 2 * math.pi * rng.uniform(1)[0]
                director = np.array([math.cos(theta), math.sin(theta), 0.0])
            else:
                v = rng.normal(3)
                director = v / np.linalg.norm(v)
            out.append(Colloid(pos=p, director=director, id=next_id, type=ptype))
            next_id += 1
    return out


def rod_colloids(
    n: int,
    center: Sequence[float],
    spacing: float,
    angle: float = 0.0,
    ptype: int = 1,
    start_id: int = 0,
) -> List[Colloid]:
    """A straight line of ``n`` particles centred on ``center`` in the xy plane."""
    if n < 2:
        raise ValueError("a rod needs at least two particles")
    axis = np.array([math.cos(angle), math.sin(angle), 0.0])
    c = np.zeros(3)
    c[: len(center)] = center
    offsets = (np.arange(n) - (n - 1) / 2.0) * spacing
    return [
        Colloid(pos=c + o * axis, director=axis, id=start_id + k, type=ptype)
        for k, o in enumerate(offsets)
    ]
