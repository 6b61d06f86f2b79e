"""Free-form deformation driven by a control-point lattice.

A point x is mapped to lattice coordinates s = E^-1 (x - origin) (E columns
are the box edge vectors), deformed by the trivariate Bernstein blend of the
control-point displacements, and mapped back. Only the displacement field is
blended, so mu = 0 is the exact identity and the deformation is linear in mu.
Points with any lattice coordinate outside [0, 1] are left untouched.
"""

import os
import warnings
from dataclasses import dataclass, field
from math import comb

import numpy as np

from ..errors import ArgumentError
from . import _ffd_np

try:  # compiled hot kernel; numpy fallback otherwise
    from . import _ffd_cy
except ImportError:  # pragma: no cover - depends on build
    _ffd_cy = None

#: True when the compiled extension is available and not disabled.
HAVE_COMPILED = _ffd_cy is not None and not os.environ.get("HULLROM_PURE_PYTHON")

DEFAULT_PARAM_BOUNDS = (-0.6, 0.5)

# Compiled kernel's per-axis control-point cap (stack buffers).
_COMPILED_MAX_COUNT = 16


def bernstein_basis(i, n, u):
    """Bernstein polynomial B_{i,n}(u) = C(n,i) u^i (1-u)^(n-i)."""
    if not 0 <= i <= n:
        raise ArgumentError(f"bernstein index i={i} outside 0..{n}")
    return comb(n, i) * u**i * (1.0 - u) ** (n - i)


@dataclass(frozen=True)
class ControlLattice:
    """FFD box with parameter bindings.

    origin        (3,) box corner
    edge_vectors  (3, 3) rows are the three box edges (must be independent)
    counts        control points per axis, each >= 2
    bindings      list of ((i, j, k), axis, slot): design parameter `slot`
                  displaces control point (i, j, k) along lattice axis `axis`
    param_box     (n_params, 2) closed bounds per parameter; defaults to
                  [-0.6, 0.5] for every slot
    """

    origin: np.ndarray
    edge_vectors: np.ndarray
    counts: tuple
    bindings: list
    param_box: np.ndarray = field(default=None)

    def __post_init__(self):
        origin = np.asarray(self.origin, dtype=float).reshape(3)
        edges = np.asarray(self.edge_vectors, dtype=float).reshape(3, 3)
        counts = tuple(int(c) for c in self.counts)
        object.__setattr__(self, "origin", origin)
        object.__setattr__(self, "edge_vectors", edges)
        object.__setattr__(self, "counts", counts)

        if abs(np.linalg.det(edges)) < 1e-12:
            raise ArgumentError("edge_vectors are not linearly independent")
        if len(counts) != 3 or any(c < 2 for c in counts):
            raise ArgumentError(f"counts must be three integers >= 2, got {counts}")
        if not self.bindings:
            raise ArgumentError("at least one binding is required")

        slots = set()
        for idx, axis, slot in self.bindings:
            i, j, k = idx
            if not (0 <= i < counts[0] and 0 <= j < counts[1] and 0 <= k < counts[2]):
                raise ArgumentError(f"binding index {idx} outside lattice counts {counts}")
            if axis not in (0, 1, 2):
                raise ArgumentError(f"binding axis must be 0, 1 or 2, got {axis}")
            if slot < 0:
                raise ArgumentError(f"negative parameter slot {slot}")
            slots.add(int(slot))

        n_params = max(slots) + 1
        if slots != set(range(n_params)):
            missing = sorted(set(range(n_params)) - slots)
            raise ArgumentError(f"parameter slots {missing} have no binding")

        if self.param_box is None:
            box = np.tile(DEFAULT_PARAM_BOUNDS, (n_params, 1)).astype(float)
        else:
            box = np.asarray(self.param_box, dtype=float).reshape(n_params, 2)
            if np.any(box[:, 0] >= box[:, 1]):
                raise ArgumentError("param_box lower bounds must be < upper bounds")
        object.__setattr__(self, "param_box", box)

    @property
    def n_params(self):
        return self.param_box.shape[0]

    def displacement_grid(self, mu):
        """Control-point displacements in lattice coordinates, (l1, m1, n1, 3)."""
        mu = np.asarray(mu, dtype=float).reshape(-1)
        if mu.size != self.n_params:
            raise ArgumentError(
                f"expected {self.n_params} parameters, got {mu.size}"
            )
        low, high = self.param_box[:, 0], self.param_box[:, 1]
        if np.any(mu < low - 1e-12) or np.any(mu > high + 1e-12):
            warnings.warn("mu outside param_box; deforming anyway", stacklevel=3)
        grid = np.zeros(self.counts + (3,), dtype=float)
        for (i, j, k), axis, slot in self.bindings:
            grid[i, j, k, axis] += mu[slot]
        return grid


def ffd_deform_points(lattice, mu, points, use_compiled=None):
    """Deform an (N, 3) point set; points outside the box are unchanged."""
    points = np.ascontiguousarray(points, dtype=float).reshape(-1, 3)
    grid = lattice.displacement_grid(mu)

    edges = lattice.edge_vectors.T  # columns are the box axes
    local = np.linalg.solve(edges, (points - lattice.origin).T).T
    inside = np.all((local >= 0.0) & (local <= 1.0), axis=1)
    if not np.any(inside):
        return points.copy()

    sub = np.ascontiguousarray(local[inside])
    disp_local = np.zeros_like(sub)
    if use_compiled is None:
        use_compiled = HAVE_COMPILED and max(lattice.counts) <= _COMPILED_MAX_COUNT
    if use_compiled:
        _ffd_cy.accumulate_displacements(sub, grid, disp_local)
    else:
        _ffd_np.accumulate_displacements(sub, grid, disp_local)

    out = points.copy()
    out[inside] += disp_local @ edges.T
    return out


def deform_mesh(lattice, mu, mesh):
    """FFD over mesh vertices; connectivity and per-face fields preserved."""
    new_vertices = ffd_deform_points(lattice, mu, mesh.vertices)
    return mesh.with_vertices(new_vertices)
