"""Pure numpy implementation of the engine kernels.

Used when the compiled extension is unavailable or when
``COLLOIDRL_PURE_PYTHON=1``. Random bits match the compiled kernel exactly;
transcendental functions may differ from the C library in the last ulp.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.spatial import cKDTree

from ..core.rng import bits_to_unit, random_bits

WCA_RCUT = 2.0 ** (1.0 / 6.0)
OVERLAP_FLOOR = 1e-6

BACKEND = "python"


def wca_forces(pos, box3, dim: int, periodic: bool, sigma: float, epsilon: float):
    """Pairwise WCA forces. Returns ``(forces (N, 3), n_overlaps)``."""
    pos = np.asarray(pos, dtype=np.float64)
    n = pos.shape[0]
    forces = np.zeros((n, 3))
    if n < 2:
        return forces, 0
    rc = WCA_RCUT * sigma
    pts = pos[:, :dim]
    if periodic:
        L = np.asarray(box3[:dim], dtype=np.float64)
        # cKDTree requires data in [0, L)
        pts = np.mod(pts, L)
        pts = np.where(pts >= L, 0.0, pts)
        tree = cKDTree(pts, boxsize=L)
    else:
        tree = cKDTree(pts)
    pairs = tree.query_pairs(rc, output_type="ndarray")
    if len(pairs) == 0:
        return forces, 0
    order = np.lexsort((pairs[:, 1], pairs[:, 0]))
    pairs = pairs[order]
    i, j = pairs[:, 0], pairs[:, 1]
    d = pos[i] - pos[j]
    if periodic:
        L3 = np.asarray(box3, dtype=np.float64)
        Ld = L3[:dim]
        d[:, :dim] -= Ld * np.ceil(d[:, :dim] / Ld - 0.5)
    r2 = np.einsum("ij,ij->i", d, d)
    keep = r2 < rc * rc
    i, j, d, r2 = i[keep], j[keep], d[keep], r2[keep]
    floor2 = (OVERLAP_FLOOR * sigma) ** 2
    overlaps = r2 < floor2
    n_overlap = int(np.count_nonzero(overlaps))
    if n_overlap:
        r = np.sqrt(r2)
        safe = np.where(r > 0, r, 1.0)
        unit = np.where((r > 0)[:, None], d / safe[:, None], np.array([1.0, 0.0, 0.0]))
        d = np.where(overlaps[:, None], unit * OVERLAP_FLOOR * sigma, d)
        r2 = np.where(overlaps, floor2, r2)
    inv2 = sigma * sigma / r2
    inv6 = inv2 * inv2 * inv2
    # |F| / r along d = r_i - r_j
    coeff = 24.0 * epsilon * (2.0 * inv6 * inv6 - inv6) / r2
    fij = coeff[:, None] * d
    np.add.at(forces, i, fij)
    np.add.at(forces, j, -fij)
    return forces, n_overlap


def _gaussians(keys, step: int):
    base = np.uint64(step) * np.uint64(4)
    u = [bits_to_unit(random_bits(keys, base + np.uint64(k))) for k in range(4)]
    r01 = np.sqrt(-2.0 * np.log(u[0]))
    a01 = 2.0 * math.pi * u[1]
    r23 = np.sqrt(-2.0 * np.log(u[2]))
    a23 = 2.0 * math.pi * u[3]
    return np.stack([r01 * np.cos(a01), r01 * np.sin(a01), r23 * np.cos(a23)], axis=1)


def langevin_step(
    pos,
    director,
    f_int,
    f_act,
    torque,
    new_dir,
    has_new_dir,
    mobile,
    keys_t,
    keys_r,
    step: int,
    dim: int,
    dt: float,
    gamma_t: float,
    gamma_r: float,
    kT: float,
    box3,
    periodic: bool,
    disp_out,
):
    """One Euler-Maruyama step, in place on ``pos`` and ``director``.

    Returns the index of the first particle with a non-finite result, or -1.
    """
    n = pos.shape[0]
    if n == 0:
        return -1
    mob = np.asarray(mobile, dtype=bool)
    e = director.copy()
    disp = (dt / gamma_t) * (f_act[:, None] * e + f_int)
    if kT > 0.0:
        xi = _gaussians(keys_t, step)
        if dim == 2:
            xi[:, 2] = 0.0
        disp = disp + math.sqrt(2.0 * kT * dt / gamma_t) * xi
    else:
        xi = None
    if dim == 2:
        disp[:, 2] = 0.0
    disp = np.where(mob[:, None], disp, 0.0)
    new_pos = pos + disp

    rot_amp = math.sqrt(2.0 * kT * dt / gamma_r)
    xr = _gaussians(keys_r, step) if kT > 0.0 else np.zeros((n, 3))
    if dim == 2:
        ang = dt * torque[:, 2] / gamma_r + rot_amp * xr[:, 0]
        c, s = np.cos(ang), np.sin(ang)
        ne = np.zeros_like(e)
        ne[:, 0] = e[:, 0] * c - e[:, 1] * s
        ne[:, 1] = e[:, 0] * s + e[:, 1] * c
    else:
        w = (dt / gamma_r) * torque + rot_amp * xr
        w = w - np.einsum("ij,ij->i", w, e)[:, None] * e
        theta = np.sqrt(np.einsum("ij,ij->i", w, w))
        safe = np.where(theta > 0, theta, 1.0)
        k = w / safe[:, None]
        ne = e * np.cos(theta)[:, None] + np.cross(k, e) * np.sin(theta)[:, None]
        ne = np.where((theta > 0)[:, None], ne, e)
    norm = np.sqrt(np.einsum("ij,ij->i", ne, ne))
    ne = ne / norm[:, None]
    hnd = np.asarray(has_new_dir, dtype=bool)
    ne = np.where(hnd[:, None], new_dir, ne)
    ne = np.where(mob[:, None], ne, e)

    box = np.asarray(box3, dtype=np.float64)
    for ax in range(dim):
        L = box[ax]
        x = new_pos[:, ax]
        if periodic:
            x = np.mod(x, L)
            x = np.where(x >= L, 0.0, x)
        else:
            flips = np.zeros(n, dtype=bool)
            for _ in range(64):
                lo = x < 0.0
                hi = x > L
                if not (lo.any() or hi.any()):
                    break
                x = np.where(lo, -x, np.where(hi, 2.0 * L - x, x))
                flips ^= lo | hi
            ne[:, ax] = np.where(flips, -ne[:, ax], ne[:, ax])
        new_pos[:, ax] = x

    bad = ~(np.isfinite(new_pos).all(axis=1) & np.isfinite(ne).all(axis=1))
    pos[:] = new_pos
    director[:] = ne
    disp_out[:] = disp
    if bad.any():
        return int(np.argmax(bad))
    return -1
