# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled FFD displacement kernel.

Same contract as hullrom.geometry._ffd_np.accumulate_displacements; the
pure-numpy version is the fallback when this extension is not built.
Control-point counts are capped at MAX_DEGREE+1 per axis; the caller falls
back to numpy above that.
"""

import numpy as np

cimport numpy as cnp

DEF MAX_N = 16  # control points per axis handled by the stack buffers


cdef inline void bernstein_row(double u, Py_ssize_t n1, double* b) noexcept nogil:
    # All n1 Bernstein polynomials of degree n1-1 at u, by the de Casteljau
    # style recurrence (numerically stable for u in [0, 1]).
    cdef Py_ssize_t j, i
    cdef double v = 1.0 - u
    b[0] = 1.0
    for j in range(1, n1):
        b[j] = u * b[j - 1]
        for i in range(j - 1, 0, -1):
            b[i] = u * b[i - 1] + v * b[i]
        b[0] = v * b[0]


def accumulate_displacements(double[:, ::1] local,
                             double[:, :, :, ::1] dcp,
                             double[:, ::1] out):
    """Add the trivariate Bernstein blend of control displacements to out.

    local : (P, 3) lattice coordinates in [0, 1]^3
    dcp   : (l1, m1, n1, 3) control-point displacements, lattice coords
    out   : (P, 3) accumulator, modified in place
    """
    cdef Py_ssize_t P = local.shape[0]
    cdef Py_ssize_t l1 = dcp.shape[0]
    cdef Py_ssize_t m1 = dcp.shape[1]
    cdef Py_ssize_t n1 = dcp.shape[2]
    if l1 > MAX_N or m1 > MAX_N or n1 > MAX_N:
        raise ValueError("lattice too large for compiled kernel")

    cdef double bu[MAX_N]
    cdef double bv[MAX_N]
    cdef double bw[MAX_N]
    cdef Py_ssize_t p, i, j, k
    cdef double wij, w
    with nogil:
        for p in range(P):
            bernstein_row(local[p, 0], l1, bu)
            bernstein_row(local[p, 1], m1, bv)
            bernstein_row(local[p, 2], n1, bw)
            for i in range(l1):
                for j in range(m1):
                    wij = bu[i] * bv[j]
                    for k in range(n1):
                        w = wij * bw[k]
                        out[p, 0] += w * dcp[i, j, k, 0]
                        out[p, 1] += w * dcp[i, j, k, 1]
                        out[p, 2] += w * dcp[i, j, k, 2]
