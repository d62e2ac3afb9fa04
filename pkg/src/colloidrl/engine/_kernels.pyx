# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled engine kernels.

Same contract and arithmetic as ``_kernels_py``; the pair search uses a
linked-cell list instead of a k-d tree.
"""

import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt, log, cos, sin, ceil, floor, fmod, isfinite, pow
from libc.stdint cimport uint64_t

cnp.import_array()

BACKEND = "cython"

cdef double PI = 3.141592653589793
cdef uint64_t GOLDEN = 0x9E3779B97F4A7C15ULL
cdef uint64_t MIX_A = 0xBF58476D1CE4E5B9ULL
cdef uint64_t MIX_B = 0x94D049BB133111EBULL
cdef double UNIT = 1.0 / 9007199254740992.0
cdef double OVERLAP_FLOOR = 1e-6


cdef inline uint64_t mix64(uint64_t z) noexcept nogil:
    z = (z ^ (z >> 30)) * MIX_A
    z = (z ^ (z >> 27)) * MIX_B
    return z ^ (z >> 31)


cdef inline double unit_at(uint64_t key, uint64_t counter) noexcept nogil:
    cdef uint64_t bits = mix64(key ^ mix64((counter + 1) * GOLDEN))
    return (<double>(bits >> 11) + 0.5) * UNIT


cdef inline void gaussians(uint64_t key, uint64_t step, double* out) noexcept nogil:
    cdef uint64_t base = step * 4
    cdef double u0 = unit_at(key, base)
    cdef double u1 = unit_at(key, base + 1)
    cdef double u2 = unit_at(key, base + 2)
    cdef double u3 = unit_at(key, base + 3)
    cdef double r01 = sqrt(-2.0 * log(u0))
    cdef double a01 = 2.0 * PI * u1
    cdef double r23 = sqrt(-2.0 * log(u2))
    cdef double a23 = 2.0 * PI * u3
    out[0] = r01 * cos(a01)
    out[1] = r01 * sin(a01)
    out[2] = r23 * cos(a23)


def random_bits_at(uint64_t key, uint64_t counter):
    """Expose the raw generator for cross-backend tests."""
    return mix64(key ^ mix64((counter + 1) * GOLDEN))


cdef inline int _pair(double[:, ::1] pos, double[:, ::1] forces, Py_ssize_t i, Py_ssize_t j,
                      double* L, int dim, bint periodic, double rc2, double sigma,
                      double epsilon) noexcept nogil:
    cdef double d[3]
    cdef double r2 = 0.0, inv2, inv6, coeff, r, floor2
    cdef int k, overlap = 0
    for k in range(3):
        d[k] = pos[i, k] - pos[j, k]
        if periodic and k < dim:
            d[k] = d[k] - L[k] * ceil(d[k] / L[k] - 0.5)
        r2 += d[k] * d[k]
    if r2 >= rc2:
        return 0
    floor2 = (OVERLAP_FLOOR * sigma) * (OVERLAP_FLOOR * sigma)
    if r2 < floor2:
        overlap = 1
        r = sqrt(r2)
        if r > 0:
            for k in range(3):
                d[k] = d[k] / r * OVERLAP_FLOOR * sigma
        else:
            d[0] = OVERLAP_FLOOR * sigma
            d[1] = 0.0
            d[2] = 0.0
        r2 = floor2
    inv2 = sigma * sigma / r2
    inv6 = inv2 * inv2 * inv2
    coeff = 24.0 * epsilon * (2.0 * inv6 * inv6 - inv6) / r2
    for k in range(3):
        forces[i, k] += coeff * d[k]
        forces[j, k] -= coeff * d[k]
    return 2 + overlap


def wca_forces(double[:, ::1] pos, double[::1] box3, int dim, bint periodic,
               double sigma, double epsilon):
    """Pairwise WCA forces. Returns ``(forces (N, 3), n_overlaps)``."""
    cdef Py_ssize_t n = pos.shape[0]
    forces_arr = np.zeros((n, 3), dtype=np.float64)
    cdef double[:, ::1] forces = forces_arr
    if n < 2:
        return forces_arr, 0
    cdef double rc = pow(2.0, 1.0 / 6.0) * sigma
    cdef double rc2 = rc * rc
    cdef double L[3]
    cdef int ncell[3]
    cdef double csize[3]
    cdef int a
    cdef bint use_cells = True
    for a in range(3):
        L[a] = box3[a]
        if a < dim:
            ncell[a] = <int>floor(L[a] / rc)
            if ncell[a] < 1:
                ncell[a] = 1
            if periodic and ncell[a] < 3:
                use_cells = False
            csize[a] = L[a] / ncell[a]
        else:
            ncell[a] = 1
            csize[a] = 1.0
    cdef long total = <long>ncell[0] * ncell[1] * ncell[2]
    if total > 4 * n + 64:
        use_cells = False

    cdef Py_ssize_t i, j
    cdef int res, n_overlap = 0
    if not use_cells:
        for i in range(n):
            for j in range(i + 1, n):
                res = _pair(pos, forces, i, j, L, dim, periodic, rc2, sigma, epsilon)
                if res == 3:
                    n_overlap += 1
        return forces_arr, n_overlap

    head_arr = np.full(total, -1, dtype=np.int64)
    nxt_arr = np.full(n, -1, dtype=np.int64)
    cell_arr = np.zeros((n, 3), dtype=np.int64)
    cdef long long[::1] head = head_arr
    cdef long long[::1] nxt = nxt_arr
    cdef long long[:, ::1] cell_of = cell_arr
    cdef long c, ci
    cdef int idx[3]
    cdef double x
    # insert in reverse so each cell lists particles in ascending order
    for i in range(n - 1, -1, -1):
        for a in range(3):
            if a < dim:
                x = pos[i, a]
                if periodic:
                    x = fmod(x, L[a])
                    if x < 0:
                        x += L[a]
                idx[a] = <int>floor(x / csize[a])
                if idx[a] < 0:
                    idx[a] = 0
                if idx[a] >= ncell[a]:
                    idx[a] = ncell[a] - 1
            else:
                idx[a] = 0
            cell_of[i, a] = idx[a]
        c = (idx[0] * ncell[1] + idx[1]) * ncell[2] + idx[2]
        nxt[i] = head[c]
        head[c] = i

    cdef int dx, dy, dz, nx, ny, nz, zr
    zr = 1 if dim == 3 else 0
    with nogil:
        for i in range(n):
            for dx in range(-1, 2):
                nx = <int>cell_of[i, 0] + dx
                if nx < 0 or nx >= ncell[0]:
                    if not periodic:
                        continue
                    nx = (nx + ncell[0]) % ncell[0]
                for dy in range(-1, 2):
                    ny = <int>cell_of[i, 1] + dy
                    if ny < 0 or ny >= ncell[1]:
                        if not periodic:
                            continue
                        ny = (ny + ncell[1]) % ncell[1]
                    for dz in range(-zr, zr + 1):
                        nz = <int>cell_of[i, 2] + dz
                        if nz < 0 or nz >= ncell[2]:
                            if not periodic:
                                continue
                            nz = (nz + ncell[2]) % ncell[2]
                        ci = (nx * ncell[1] + ny) * ncell[2] + nz
                        j = head[ci]
                        while j >= 0:
                            if j > i:
                                res = _pair(pos, forces, i, j, L, dim, periodic, rc2, sigma, epsilon)
                                if res == 3:
                                    n_overlap += 1
                            j = nxt[j]
    return forces_arr, n_overlap


def langevin_step(double[:, ::1] pos, double[:, ::1] director, double[:, ::1] f_int,
                  double[::1] f_act, double[:, ::1] torque, double[:, ::1] new_dir,
                  cnp.uint8_t[::1] has_new_dir, cnp.uint8_t[::1] mobile,
                  cnp.uint64_t[::1] keys_t, cnp.uint64_t[::1] keys_r,
                  uint64_t step, int dim, double dt, double gamma_t, double gamma_r,
                  double kT, double[::1] box3, bint periodic, double[:, ::1] disp_out):
    """One Euler-Maruyama step, in place on ``pos`` and ``director``.

    Returns the index of the first particle with a non-finite result, or -1.
    """
    cdef Py_ssize_t n = pos.shape[0]
    cdef Py_ssize_t i
    cdef int k, it
    cdef double e[3]
    cdef double ne[3]
    cdef double xi[3]
    cdef double xr[3]
    cdef double w[3]
    cdef double kv[3]
    cdef double newp[3]
    cdef double disp[3]
    cdef double ct = dt / gamma_t
    cdef double cr = dt / gamma_r
    cdef double amp_t = sqrt(2.0 * kT * dt / gamma_t)
    cdef double amp_r = sqrt(2.0 * kT * dt / gamma_r)
    cdef double ang, c, s, wdot, theta, norm, x, Lx
    cdef bint flip, noisy = kT > 0.0
    cdef long bad = -1
    with nogil:
        for i in range(n):
            for k in range(3):
                e[k] = director[i, k]
            if not mobile[i]:
                for k in range(3):
                    disp_out[i, k] = 0.0
                continue
            if noisy:
                gaussians(keys_t[i], step, xi)
                gaussians(keys_r[i], step, xr)
                if dim == 2:
                    xi[2] = 0.0
            else:
                for k in range(3):
                    xi[k] = 0.0
                    xr[k] = 0.0
            for k in range(3):
                disp[k] = ct * (f_act[i] * e[k] + f_int[i, k])
                if noisy:
                    disp[k] = disp[k] + amp_t * xi[k]
            if dim == 2:
                disp[2] = 0.0
            for k in range(3):
                newp[k] = pos[i, k] + disp[k]

            if has_new_dir[i]:
                for k in range(3):
                    ne[k] = new_dir[i, k]
            else:
                if dim == 2:
                    ang = dt * torque[i, 2] / gamma_r + amp_r * xr[0]
                    c = cos(ang)
                    s = sin(ang)
                    ne[0] = e[0] * c - e[1] * s
                    ne[1] = e[0] * s + e[1] * c
                    ne[2] = 0.0
                else:
                    for k in range(3):
                        w[k] = cr * torque[i, k] + amp_r * xr[k]
                    wdot = w[0] * e[0] + w[1] * e[1] + w[2] * e[2]
                    for k in range(3):
                        w[k] = w[k] - wdot * e[k]
                    theta = sqrt(w[0] * w[0] + w[1] * w[1] + w[2] * w[2])
                    if theta > 0:
                        for k in range(3):
                            kv[k] = w[k] / theta
                        c = cos(theta)
                        s = sin(theta)
                        ne[0] = e[0] * c + (kv[1] * e[2] - kv[2] * e[1]) * s
                        ne[1] = e[1] * c + (kv[2] * e[0] - kv[0] * e[2]) * s
                        ne[2] = e[2] * c + (kv[0] * e[1] - kv[1] * e[0]) * s
                    else:
                        for k in range(3):
                            ne[k] = e[k]
                norm = sqrt(ne[0] * ne[0] + ne[1] * ne[1] + ne[2] * ne[2])
                for k in range(3):
                    ne[k] = ne[k] / norm

            for k in range(dim):
                Lx = box3[k]
                x = newp[k]
                if periodic:
                    x = fmod(x, Lx)
                    if x < 0:
                        x = x + Lx
                    if x >= Lx:
                        x = 0.0
                else:
                    flip = False
                    for it in range(64):
                        if x < 0.0:
                            x = -x
                            flip = not flip
                        elif x > Lx:
                            x = 2.0 * Lx - x
                            flip = not flip
                        else:
                            break
                    if flip:
                        ne[k] = -ne[k]
                newp[k] = x

            for k in range(3):
                pos[i, k] = newp[k]
                director[i, k] = ne[k]
                disp_out[i, k] = disp[k]
                if bad < 0 and not (isfinite(newp[k]) and isfinite(ne[k])):
                    bad = i
    return bad
