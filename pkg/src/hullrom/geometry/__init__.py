from .lattice import (
    HAVE_COMPILED,
    ControlLattice,
    bernstein_basis,
    deform_mesh,
    ffd_deform_points,
)
from .mesh import (
    SurfaceMesh,
    drag_from_pressure,
    load_mesh,
    save_mesh,
    volume_below_plane,
)

__all__ = [
    "HAVE_COMPILED",
    "ControlLattice",
    "SurfaceMesh",
    "bernstein_basis",
    "deform_mesh",
    "drag_from_pressure",
    "ffd_deform_points",
    "load_mesh",
    "save_mesh",
    "volume_below_plane",
]
