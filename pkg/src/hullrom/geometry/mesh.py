"""Triangle surface meshes: I/O, diagnostics, and the two hull integrals
(volume below a waterline plane, pressure drag along a direction).

Formats: ASCII STL and an indexed-triangle text format (`v x y z` / `f i j k`,
1-based). Quadrilateral faces in the indexed format are split along the
shorter diagonal at load time.
"""

from dataclasses import dataclass, field

import numpy as np

from ..errors import ArgumentError, GeometryError, ParseError

# Degenerate-face area threshold, in units of bbox_diagonal^2.
DEGENERATE_AREA_REL = 1e-12


@dataclass
class SurfaceMesh:
    vertices: np.ndarray  # (V, 3)
    faces: np.ndarray  # (F, 3) int, outward winding
    face_scalar: np.ndarray = None  # optional per-face field (e.g. pressure)
    diagnostics: dict = field(default_factory=dict)

    def __post_init__(self):
        self.vertices = np.asarray(self.vertices, dtype=float).reshape(-1, 3)
        self.faces = np.asarray(self.faces, dtype=np.int64).reshape(-1, 3)
        if self.faces.size and (
            self.faces.min() < 0 or self.faces.max() >= len(self.vertices)
        ):
            raise ArgumentError("face index out of range")
        if self.face_scalar is not None:
            self.face_scalar = np.asarray(self.face_scalar, dtype=float).reshape(-1)
            if self.face_scalar.size != len(self.faces):
                raise ArgumentError("face_scalar length must match face count")

    def with_vertices(self, vertices):
        return SurfaceMesh(
            vertices, self.faces.copy(), face_scalar=None
            if self.face_scalar is None
            else self.face_scalar.copy(),
            diagnostics=dict(self.diagnostics),
        )

    @property
    def bbox_diagonal(self):
        if not len(self.vertices):
            return 0.0
        return float(np.linalg.norm(self.vertices.max(0) - self.vertices.min(0)))

    def face_corners(self):
        return self.vertices[self.faces]  # (F, 3, 3)

    def face_normals_areas(self):
        """Unit outward normals and areas from the stored winding."""
        c = self.face_corners()
        cross = np.cross(c[:, 1] - c[:, 0], c[:, 2] - c[:, 0])
        doubled = np.linalg.norm(cross, axis=1)
        areas = 0.5 * doubled
        with np.errstate(invalid="ignore", divide="ignore"):
            normals = cross / doubled[:, None]
        return np.nan_to_num(normals), areas

    def drop_degenerate_faces(self):
        """Remove zero-area faces (tolerance relative to bbox diagonal^2)."""
        _, areas = self.face_normals_areas()
        tol = DEGENERATE_AREA_REL * self.bbox_diagonal**2
        keep = areas > tol
        dropped = int((~keep).sum())
        if dropped:
            self.faces = self.faces[keep]
            if self.face_scalar is not None:
                self.face_scalar = self.face_scalar[keep]
        self.diagnostics["degenerate_faces_dropped"] = dropped
        return self

    def nonmanifold_edges(self):
        """Undirected edges used by more than two faces."""
        edges = {}
        for f in self.faces:
            for a, b in ((f[0], f[1]), (f[1], f[2]), (f[2], f[0])):
                key = (min(a, b), max(a, b))
                edges[key] = edges.get(key, 0) + 1
        return sorted(k for k, n in edges.items() if n > 2)


def volume_below_plane(mesh, z_cut):
    """Volume enclosed below z = z_cut for a mesh watertight under the cut.

    Triangles are clipped exactly (linear interpolation along edges), the cut
    cap is fanned from the centroid of the cut boundary, and the volume is the
    absolute sum of signed tetrahedra. Raises GeometryError when the clipped
    surface has a boundary off the cut plane (open input mesh).
    """
    verts = mesh.vertices
    faces = mesh.faces
    diag = mesh.bbox_diagonal
    plane_tol = 1e-9 * max(diag, 1.0)

    below = verts[:, 2] <= z_cut
    new_points = []  # interpolated cut vertices, appended after the originals
    cut_cache = {}  # canonical original edge -> new vertex id

    def cut_vertex(a, b):
        key = (min(a, b), max(a, b))
        vid = cut_cache.get(key)
        if vid is None:
            pa, pb = verts[key[0]], verts[key[1]]
            t = (z_cut - pa[2]) / (pb[2] - pa[2])
            p = pa + t * (pb - pa)
            p[2] = z_cut
            vid = len(verts) + len(new_points)
            new_points.append(p)
            cut_cache[key] = vid
        return vid

    kept = []
    for f in faces:
        mask = below[f]
        n_below = int(mask.sum())
        if n_below == 0:
            continue
        if n_below == 3:
            kept.append(tuple(f))
            continue
        # rotate (winding preserved) so the odd-one-out vertex comes first
        o = int(np.argmax(mask)) if n_below == 1 else int(np.argmin(mask))
        a, b, c = int(f[o]), int(f[(o + 1) % 3]), int(f[(o + 2) % 3])
        if n_below == 1:
            # a below; b, c above
            ab = cut_vertex(a, b)
            ca = cut_vertex(c, a)
            kept.append((a, ab, ca))
        else:
            # a above; b, c below
            ab = cut_vertex(a, b)
            ca = cut_vertex(c, a)
            kept.append((ab, b, c))
            kept.append((ab, c, ca))

    if not kept:
        return 0.0

    all_verts = np.vstack([verts] + [np.array(new_points)]) if new_points else verts
    kept = np.asarray(kept, dtype=np.int64)

    # Boundary of the kept surface: directed edges without a reverse partner.
    directed = {}
    for f in kept:
        for a, b in ((f[0], f[1]), (f[1], f[2]), (f[2], f[0])):
            directed[(int(a), int(b))] = directed.get((int(a), int(b)), 0) + 1
    boundary = []
    for (a, b), n in directed.items():
        extra = n - directed.get((b, a), 0)
        boundary.extend([(a, b)] * max(extra, 0))

    cap = []
    if boundary:
        bpts = all_verts[np.array([e for edge in boundary for e in edge])]
        gaps = np.abs(bpts[:, 2] - z_cut)
        if gaps.max() > plane_tol:
            raise GeometryError(
                f"mesh is not watertight below the cut: boundary gap "
                f"{gaps.max():.3e} off the plane z = {z_cut}"
            )
        centroid = bpts.mean(axis=0)
        centroid[2] = z_cut
        cid = len(all_verts)
        all_verts = np.vstack([all_verts, centroid[None]])
        # reversed edge closes the surface with an upward-facing cap
        cap = [(b, a, cid) for (a, b) in boundary]

    tris = np.vstack([kept, np.asarray(cap, dtype=np.int64)]) if cap else kept
    origin = np.array([0.0, 0.0, z_cut])
    c = all_verts[tris] - origin
    signed = np.einsum("fi,fi->f", c[:, 0], np.cross(c[:, 1], c[:, 2])) / 6.0
    return float(abs(signed.sum()))


def drag_from_pressure(mesh, direction):
    """Force along `direction` from the per-face pressure field:
    sum over faces of p_f (n_f . direction) area_f."""
    if mesh.face_scalar is None:
        raise ArgumentError("mesh has no per-face pressure field")
    direction = np.asarray(direction, dtype=float).reshape(3)
    norm = np.linalg.norm(direction)
    if abs(norm - 1.0) > 1e-8:
        direction = direction / norm
    normals, areas = mesh.face_normals_areas()
    return float(np.sum(mesh.face_scalar * (normals @ direction) * areas))


# ---------------------------------------------------------------------------
# I/O


def load_mesh(path, fmt=None):
    """Load a mesh; format from extension (.stl -> ASCII STL, else indexed)."""
    fmt = fmt or ("stl" if str(path).lower().endswith(".stl") else "indexed")
    with open(path) as fh:
        text = fh.read()
    if fmt == "stl":
        mesh = _parse_stl(text, path)
    elif fmt == "indexed":
        mesh = _parse_indexed(text, path)
    else:
        raise ArgumentError(f"unknown mesh format {fmt!r}")
    mesh.drop_degenerate_faces()
    mesh.diagnostics["nonmanifold_edges"] = mesh.nonmanifold_edges()
    return mesh


def save_mesh(mesh, path, fmt=None):
    fmt = fmt or ("stl" if str(path).lower().endswith(".stl") else "indexed")
    if fmt == "stl":
        text = _format_stl(mesh)
    elif fmt == "indexed":
        text = _format_indexed(mesh)
    else:
        raise ArgumentError(f"unknown mesh format {fmt!r}")
    with open(path, "w") as fh:
        fh.write(text)


def _parse_stl(text, path):
    lines = text.splitlines()
    vert_ids = {}
    vertices = []
    faces = []
    pending = []
    seen_solid = False

    def vid(p):
        key = tuple(p)
        i = vert_ids.get(key)
        if i is None:
            i = len(vertices)
            vertices.append(p)
            vert_ids[key] = i
        return i

    for ln, raw in enumerate(lines, start=1):
        tokens = raw.split()
        if not tokens:
            continue
        word = tokens[0].lower()
        if word == "solid":
            seen_solid = True
        elif word == "vertex":
            if len(tokens) != 4:
                raise ParseError(f"{path}:{ln}: malformed vertex line")
            try:
                pending.append(tuple(float(t) for t in tokens[1:4]))
            except ValueError:
                raise ParseError(f"{path}:{ln}: non-numeric vertex coordinate")
        elif word == "endfacet":
            if len(pending) != 3:
                raise ParseError(
                    f"{path}:{ln}: facet has {len(pending)} vertices, expected 3"
                )
            faces.append(tuple(vid(p) for p in pending))
            pending = []
        elif word in ("facet", "outer", "endloop", "endsolid"):
            continue
        else:
            raise ParseError(f"{path}:{ln}: unexpected token {tokens[0]!r}")
    if not seen_solid:
        raise ParseError(f"{path}:1: not an ASCII STL file (no 'solid' header)")
    if not faces:
        raise ParseError(f"{path}: no facets found")
    return SurfaceMesh(np.array(vertices), np.array(faces))


def _format_stl(mesh):
    normals, _ = mesh.face_normals_areas()
    out = ["solid hullrom"]
    for f, n in zip(mesh.faces, normals):
        out.append(f"  facet normal {n[0]:.17e} {n[1]:.17e} {n[2]:.17e}")
        out.append("    outer loop")
        for v in mesh.vertices[f]:
            out.append(f"      vertex {v[0]:.17e} {v[1]:.17e} {v[2]:.17e}")
        out.append("    endloop")
        out.append("  endfacet")
    out.append("endsolid hullrom")
    return "\n".join(out) + "\n"


def _parse_indexed(text, path):
    vertices = []
    faces = []
    scalars = []
    for ln, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tokens = line.split()
        try:
            if tokens[0] == "v" and len(tokens) == 4:
                vertices.append([float(t) for t in tokens[1:]])
            elif tokens[0] == "f" and len(tokens) in (4, 5):
                idx = [int(t) - 1 for t in tokens[1:]]
                if len(idx) == 3:
                    faces.append(idx)
                else:
                    # split quad along its shorter diagonal
                    faces.extend(_split_quad(vertices, idx))
            elif tokens[0] == "fs" and len(tokens) == 2:
                scalars.append(float(tokens[1]))
            else:
                raise ParseError(f"{path}:{ln}: unrecognized line {raw!r}")
        except (ValueError, IndexError):
            raise ParseError(f"{path}:{ln}: malformed line {raw!r}")
    if not vertices or not faces:
        raise ParseError(f"{path}: no usable geometry found")
    face_scalar = np.array(scalars) if len(scalars) == len(faces) else None
    return SurfaceMesh(np.array(vertices), np.array(faces), face_scalar=face_scalar)


def _split_quad(vertices, idx):
    a, b, c, d = idx
    va, vb, vc, vd = (np.array(vertices[i]) for i in idx)
    if np.linalg.norm(vc - va) <= np.linalg.norm(vd - vb):
        return [[a, b, c], [a, c, d]]
    return [[a, b, d], [b, c, d]]


def _format_indexed(mesh):
    out = []
    for v in mesh.vertices:
        out.append(f"v {v[0]:.17e} {v[1]:.17e} {v[2]:.17e}")
    for i, f in enumerate(mesh.faces):
        out.append(f"f {f[0] + 1} {f[1] + 1} {f[2] + 1}")
        if mesh.face_scalar is not None:
            out.append(f"fs {mesh.face_scalar[i]:.17e}")
    return "\n".join(out) + "\n"
