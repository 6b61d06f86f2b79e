"""Pure-numpy FFD displacement kernel (fallback for the compiled one)."""

from math import comb

import numpy as np


def bernstein_matrix(u, n1):
    """All n1 Bernstein polynomials of degree n1-1 at each u; shape (len(u), n1)."""
    u = np.asarray(u, dtype=float)
    n = n1 - 1
    i = np.arange(n1)
    coef = np.array([comb(n, ii) for ii in i], dtype=float)
    with np.errstate(invalid="ignore"):
        out = coef * u[:, None] ** i * (1.0 - u[:, None]) ** (n - i)
    # 0**0 corner cases at u = 0 or 1
    return np.nan_to_num(out, nan=0.0)


def accumulate_displacements(local, dcp, out):
    """Same contract as the compiled kernel: out += Bernstein blend of dcp."""
    bu = bernstein_matrix(local[:, 0], dcp.shape[0])
    bv = bernstein_matrix(local[:, 1], dcp.shape[1])
    bw = bernstein_matrix(local[:, 2], dcp.shape[2])
    out += np.einsum("pi,pj,pk,ijka->pa", bu, bv, bw, dcp, optimize=True)
