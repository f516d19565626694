# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels for the semidiscrete hot path.

Mirrors ``_reference.py`` operation for operation; the test suite asserts
bitwise agreement between the two backends.
"""

import numpy as np

cimport numpy as cnp

cnp.import_array()

BACKEND = "compiled"

PAR_FIELDS = ("c", "d", "k", "l", "q", "r", "s", "w", "D_B", "D_W")


def rhs_flat(double[::1] u, double p, double[::1] par, double h,
             out=None, bint include_reaction=True):
    cdef Py_ssize_t m = u.shape[0]
    cdef Py_ssize_t n = m // 3
    if out is None:
        out = np.empty(m)
    cdef double[::1] o = out
    cdef double c = par[0], d = par[1], k = par[2], l = par[3]
    cdef double q = par[4], r = par[5], s = par[6], w = par[7]
    cdef double DB = par[8], DW = par[9]
    cdef double inv_h2 = 1.0 / (h * h)
    cdef double decay = k + w * p
    cdef Py_ssize_t i, b
    cdef double B, W, T, lapB, lapW

    for i in range(n):
        b = 3 * i
        B = u[b]
        W = u[b + 1]
        T = u[b + 2]
        if i == 0:
            lapB = 2.0 * (u[b + 3] - B) * inv_h2
            lapW = 2.0 * (u[b + 4] - W) * inv_h2
        elif i == n - 1:
            lapB = 2.0 * (u[b - 3] - B) * inv_h2
            lapW = 2.0 * (u[b - 2] - W) * inv_h2
        else:
            lapB = ((u[b - 3] + u[b + 3]) - 2.0 * B) * inv_h2
            lapW = ((u[b - 2] + u[b + 4]) - 2.0 * W) * inv_h2
        if include_reaction:
            o[b] = DB * lapB + (c * B * B * W - (d + s * T) * B)
            o[b + 1] = DW * lapW + (p - r * B * B * W - l * W)
            o[b + 2] = q * (d + s * T) * B - decay * T
        else:
            o[b] = DB * lapB
            o[b + 1] = DW * lapW
            o[b + 2] = 0.0
    return out


def jacobian_band(double[::1] u, double p, double[::1] par, double h, out=None):
    cdef Py_ssize_t m = u.shape[0]
    cdef Py_ssize_t n = m // 3
    if out is None:
        out = np.zeros((7, m))
    else:
        out[:] = 0.0
    cdef double[:, ::1] o = out
    cdef double c = par[0], d = par[1], k = par[2], l = par[3]
    cdef double q = par[4], r = par[5], s = par[6], w = par[7]
    cdef double DB = par[8], DW = par[9]
    cdef double inv_h2 = 1.0 / (h * h)
    cdef double decay = k + w * p
    cdef Py_ssize_t i, b
    cdef double B, W, T

    for i in range(n):
        b = 3 * i
        B = u[b]
        W = u[b + 1]
        T = u[b + 2]
        o[3, b] = 2.0 * c * B * W - d - s * T - 2.0 * DB * inv_h2
        o[3, b + 1] = -r * B * B - l - 2.0 * DW * inv_h2
        o[3, b + 2] = q * s * B - decay
        o[2, b + 1] = c * B * B
        o[1, b + 2] = -s * B
        o[4, b] = -2.0 * r * B * W
        o[5, b] = q * (d + s * T)
        if i < n - 1:
            # right neighbour, stored at column 3(i+1)+f
            o[0, b + 3] = (2.0 * DB * inv_h2) if i == 0 else (DB * inv_h2)
            o[0, b + 4] = (2.0 * DW * inv_h2) if i == 0 else (DW * inv_h2)
        if i > 0:
            # left neighbour, stored at column 3(i-1)+f
            o[6, b - 3] = (2.0 * DB * inv_h2) if i == n - 1 else (DB * inv_h2)
            o[6, b - 2] = (2.0 * DW * inv_h2) if i == n - 1 else (DW * inv_h2)
    return out
