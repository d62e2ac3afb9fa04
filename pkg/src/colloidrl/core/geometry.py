"""Small geometry helpers."""

from __future__ import annotations

import numpy as np


def rotate_about_axis(v, axis, angle: float) -> np.ndarray:
    """Rotate ``v`` by ``angle`` (right-hand rule) about ``axis``.

    Rodrigues' formula; the result is renormalised so repeated application
    does not drift off the unit sphere.
    """
    v = np.asarray(v, dtype=np.float64)
    axis = np.asarray(axis, dtype=np.float64)
    norm = np.linalg.norm(axis)
    if norm == 0.0:
        if angle == 0.0:
            return v / np.linalg.norm(v)
        raise ValueError("degenerate rotation axis")
    k = axis / norm
    c, s = np.cos(angle), np.sin(angle)
    out = v * c + np.cross(k, v) * s + k * np.dot(k, v) * (1.0 - c)
    return out / np.linalg.norm(out)


def minimum_image_displacement(a, b, box, boundary: str = "periodic") -> np.ndarray:
    """Displacement ``b - a``, wrapped to the nearest image if periodic.

    Components land in ``(-L/2, L/2]``; an exact half-box separation
    resolves to ``+L/2``.
    """
    d = np.asarray(b, dtype=np.float64) - np.asarray(a, dtype=np.float64)
    if boundary != "periodic":
        return d
    box = np.asarray(box, dtype=np.float64)
    n = min(d.shape[-1], box.shape[-1])
    wrapped = d.copy()
    L = box[..., :n]
    seg = wrapped[..., :n]
    with np.errstate(invalid="ignore", divide="ignore"):
        shift = np.where(L > 0, np.ceil(seg / np.where(L > 0, L, 1.0) - 0.5), 0.0)
    wrapped[..., :n] = seg - L * shift
    return wrapped


def wrap_positions(pos: np.ndarray, box) -> np.ndarray:
    box = np.asarray(box, dtype=np.float64)
    out = np.array(pos, dtype=np.float64, copy=True)
    n = box.shape[0]
    seg = np.mod(out[..., :n], box)
    # fmod of a tiny negative number can round up to exactly L
    out[..., :n] = np.where(seg >= box, 0.0, seg)
    return out
