# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled implementations of the hot kernels (element stiffness blocks and
batched Kelvin evaluation).  Kept in lockstep with `_ref`, the pure-NumPy
twin selected when this extension is unavailable."""

import numpy as np

cimport numpy as cnp
from libc.math cimport sqrt, pi

cnp.import_array()


def stiffness_blocks(coords):
    """Per-tet P1 element data; see `_ref.stiffness_blocks` for the contract."""
    cdef cnp.ndarray[cnp.float64_t, ndim=3] c = np.ascontiguousarray(coords, dtype=np.float64)
    cdef Py_ssize_t nt = c.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=1] vol = np.empty(nt, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=3] grads = np.empty((nt, 4, 3), dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=3] a_lam = np.empty((nt, 12, 12), dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=3] a_mu = np.empty((nt, 12, 12), dtype=np.float64)

    cdef double e[3][3]
    cdef double inv[3][3]
    cdef double g[4][3]
    cdef double det, v, dot
    cdef Py_ssize_t n, i, j, a, b, p, q

    for n in range(nt):
        for i in range(3):
            for j in range(3):
                e[i][j] = c[n, i + 1, j] - c[n, 0, j]
        det = (e[0][0] * (e[1][1] * e[2][2] - e[1][2] * e[2][1])
               - e[0][1] * (e[1][0] * e[2][2] - e[1][2] * e[2][0])
               + e[0][2] * (e[1][0] * e[2][1] - e[1][1] * e[2][0]))
        vol[n] = det / 6.0
        inv[0][0] = (e[1][1] * e[2][2] - e[1][2] * e[2][1]) / det
        inv[0][1] = (e[0][2] * e[2][1] - e[0][1] * e[2][2]) / det
        inv[0][2] = (e[0][1] * e[1][2] - e[0][2] * e[1][1]) / det
        inv[1][0] = (e[1][2] * e[2][0] - e[1][0] * e[2][2]) / det
        inv[1][1] = (e[0][0] * e[2][2] - e[0][2] * e[2][0]) / det
        inv[1][2] = (e[0][2] * e[1][0] - e[0][0] * e[1][2]) / det
        inv[2][0] = (e[1][0] * e[2][1] - e[1][1] * e[2][0]) / det
        inv[2][1] = (e[0][1] * e[2][0] - e[0][0] * e[2][1]) / det
        inv[2][2] = (e[0][0] * e[1][1] - e[0][1] * e[1][0]) / det
        # Hat-function gradients: g_i = column i-1 of inv(E) for i = 1..3.
        for a in range(3):
            g[1][a] = inv[a][0]
            g[2][a] = inv[a][1]
            g[3][a] = inv[a][2]
        for a in range(3):
            g[0][a] = -(g[1][a] + g[2][a] + g[3][a])
        for i in range(4):
            for a in range(3):
                grads[n, i, a] = g[i][a]

        v = vol[n]
        for i in range(4):
            for j in range(4):
                dot = g[i][0] * g[j][0] + g[i][1] * g[j][1] + g[i][2] * g[j][2]
                for a in range(3):
                    p = 3 * i + a
                    for b in range(3):
                        q = 3 * j + b
                        a_lam[n, p, q] = v * g[i][a] * g[j][b]
                        if a == b:
                            a_mu[n, p, q] = v * 0.5 * (dot + g[j][a] * g[i][b])
                        else:
                            a_mu[n, p, q] = v * 0.5 * g[j][a] * g[i][b]
    return vol, grads, a_lam, a_mu


def kelvin_batch(points, y, double mu, double nu):
    """Kelvin matrices for a batch of points; see `_ref.kelvin_batch`."""
    cdef cnp.ndarray[cnp.float64_t, ndim=2] pts = np.ascontiguousarray(points, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] src = np.ascontiguousarray(y, dtype=np.float64)
    cdef Py_ssize_t m = pts.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=3] out = np.empty((m, 3, 3), dtype=np.float64)
    cdef double pref = 1.0 / (16.0 * pi * mu * (1.0 - nu))
    cdef double kd = 3.0 - 4.0 * nu
    cdef double r[3]
    cdef double dist, d3
    cdef Py_ssize_t n, i, j

    for n in range(m):
        for i in range(3):
            r[i] = pts[n, i] - src[i]
        dist = sqrt(r[0] * r[0] + r[1] * r[1] + r[2] * r[2])
        if dist == 0.0:
            raise ValueError("coincident evaluation and source points")
        d3 = dist * dist * dist
        for i in range(3):
            for j in range(3):
                out[n, i, j] = pref * (r[i] * r[j] / d3 + (kd / dist if i == j else 0.0))
    return out
