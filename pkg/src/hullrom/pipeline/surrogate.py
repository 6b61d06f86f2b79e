"""Stand-ins for the high-fidelity flow solver.

analytic-ridge       resistance-like QoI with an exactly two-dimensional
                     active subspace, realized as the asymptote of a
                     synthetic exponentially-converging snapshot series;
                     volume from the deformed mesh.
analytic-ridge-2qoi  same resistance, but the volume is a second analytic
                     ridge sharing the first direction (no mesh needed).
file                 snapshots read from disk; the state vector is the
                     per-face pressure on the deformed mesh, so the regime
                     resistance is the pressure drag plus the ITTC-57
                     viscous correction.
"""

import numpy as np

from ..dmd import SnapshotSet, load_snapshots
from ..errors import ArgumentError
from ..geometry import drag_from_pressure, volume_below_plane
from ..geometry.primitives import box_mesh

# Analytic-ridge constants (scaled coordinates in [-1, 1]^m):
#   direction_1 = ones(m) / sqrt(m)
#   direction_2 = alternating +1/-1, orthogonalized against direction_1
#   resistance(mu) = R0 + (d1 . mu)^2 + 0.5 (d2 . mu)^2
#   volume ridge   = V0 + 0.5 (d1 . mu) + 0.25 (d2 . mu)^2
# Both ridges live in span{d1, d2} (the volume adds a linear term along the
# shared first direction), so the union of the two active subspaces stays
# two-dimensional and the shared reduction is lossless; this keeps the
# constrained minimum well defined for oracle comparisons.
RIDGE_R0 = 40.0
RIDGE_V0 = 1.0
STATE_DIM = 24
DECAY_RATE = 0.7  # 1/s, transient e^{-DECAY_RATE (t - t_start)}


def ridge_directions(m):
    d1 = np.ones(m) / np.sqrt(m)
    d2 = np.array([1.0 if i % 2 == 0 else -1.0 for i in range(m)])
    d2 -= (d2 @ d1) * d1
    norm = np.linalg.norm(d2)
    if norm < 1e-12:
        raise ArgumentError(f"cannot build two ridge directions for m = {m}")
    return d1, d2 / norm


def default_hull_mesh():
    """Built-in stand-in hull: a gridded closed box straddling z = 0."""
    return box_mesh((0.0, -0.25, -0.25), (1.0, 0.25, 0.25), divisions=(12, 6, 6))


class AnalyticRidgeSurrogate:
    """Deterministic synthetic solver with a known 2-D active subspace."""

    name = "analytic-ridge"
    needs_mesh = True

    def __init__(self, n_params, analytic_volume=False):
        self.d1, self.d2 = ridge_directions(n_params)
        self.analytic_volume = analytic_volume
        if analytic_volume:
            self.name = "analytic-ridge-2qoi"
            self.needs_mesh = False
        # fixed spatial patterns; component 0 carries the resistance value
        idx = np.arange(STATE_DIM)
        self.steady_pattern = np.where(idx == 0, 0.0, 0.5 * np.sin(0.7 * idx))
        self.transient_pattern = np.cos(0.4 * idx)

    def resistance_value(self, mu_scaled):
        t1 = float(self.d1 @ mu_scaled)
        t2 = float(self.d2 @ mu_scaled)
        return RIDGE_R0 + t1**2 + 0.5 * t2**2

    def resistance_gradient(self, mu_scaled):
        t1 = float(self.d1 @ mu_scaled)
        t2 = float(self.d2 @ mu_scaled)
        return 2.0 * t1 * self.d1 + t2 * self.d2

    def volume_value(self, mu_scaled):
        t1 = float(self.d1 @ mu_scaled)
        t2 = float(self.d2 @ mu_scaled)
        return RIDGE_V0 + 0.5 * t1 + 0.25 * t2**2

    def volume_gradient(self, mu_scaled):
        t2 = float(self.d2 @ mu_scaled)
        return 0.5 * self.d1 + 0.5 * t2 * self.d2

    def snapshots(self, index, mu_scaled, config):
        """Exponentially converging rank-2 series whose asymptote encodes
        the resistance in state component 0."""
        times = config.times
        steady = self.resistance_value(mu_scaled) * np.eye(STATE_DIM)[0]
        steady = steady + self.steady_pattern
        amp = 3.0 + 0.5 * float(self.d1 @ mu_scaled)
        decay = np.exp(-DECAY_RATE * (times - config.t_start))
        data = steady[:, None] + amp * np.outer(self.transient_pattern, decay)
        return SnapshotSet(data, dt=config.dt, t0=config.t_start)

    def resistance(self, steady_state_vec, deformed_mesh, config):
        return float(steady_state_vec[0])

    def volume(self, mu_scaled, deformed_mesh, config):
        if self.analytic_volume:
            return self.volume_value(mu_scaled)
        return volume_below_plane(deformed_mesh, config.z_cut)


class FileSurrogate:
    """Reads externally computed snapshot series (per-face pressure fields)
    from disk, one file per sample."""

    name = "file"
    needs_mesh = True

    def __init__(self, snapshot_template):
        if not snapshot_template:
            raise ArgumentError("file surrogate needs snapshot_template")
        self.snapshot_template = snapshot_template

    resistance_gradient = None
    volume_gradient = None

    def snapshots(self, index, mu_scaled, config):
        path = self.snapshot_template.format(index=index)
        return load_snapshots(path, dt=config.dt, t0=config.t_start)

    def resistance(self, steady_state_vec, deformed_mesh, config):
        from .campaign import ittc57_cf  # local import avoids a cycle

        if len(steady_state_vec) != len(deformed_mesh.faces):
            raise ArgumentError(
                f"state dimension {len(steady_state_vec)} != face count "
                f"{len(deformed_mesh.faces)}; the file surrogate state must "
                f"be the per-face pressure"
            )
        pressurized = deformed_mesh.with_vertices(deformed_mesh.vertices)
        pressurized.face_scalar = np.asarray(steady_state_vec, dtype=float)
        wave = drag_from_pressure(pressurized, config.drag_direction)
        viscous = (
            0.5
            * config.density
            * config.speed**2
            * config.wetted_surface
            * ittc57_cf(config.reynolds)
        )
        return wave + viscous

    def volume(self, mu_scaled, deformed_mesh, config):
        return volume_below_plane(deformed_mesh, config.z_cut)


def make_surrogate(config):
    if config.surrogate == "analytic-ridge":
        return AnalyticRidgeSurrogate(config.n_params)
    if config.surrogate == "analytic-ridge-2qoi":
        return AnalyticRidgeSurrogate(config.n_params, analytic_volume=True)
    if config.surrogate == "file":
        return FileSurrogate(config.snapshot_template)
    raise ArgumentError(f"unknown surrogate {config.surrogate!r}")
