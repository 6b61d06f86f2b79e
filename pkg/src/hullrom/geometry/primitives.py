"""Built-in watertight meshes: a gridded box (stand-in hull) and an
icosphere (used by analytic volume oracles)."""

import numpy as np

from .mesh import SurfaceMesh


def box_mesh(min_corner, max_corner, divisions=(8, 4, 4)):
    """Closed triangulated axis-aligned box, outward winding."""
    lo = np.asarray(min_corner, dtype=float)
    hi = np.asarray(max_corner, dtype=float)
    nx, ny, nz = (int(d) for d in divisions)

    vert_ids = {}
    vertices = []
    faces = []

    def vid(p):
        key = (round(p[0], 12), round(p[1], 12), round(p[2], 12))
        i = vert_ids.get(key)
        if i is None:
            i = len(vertices)
            vertices.append(p)
            vert_ids[key] = i
        return i

    def add_face_grid(axis, at_max, nu, nv):
        # grid on the box face where coordinate `axis` is fixed
        u_axis, v_axis = [a for a in range(3) if a != axis]
        us = np.linspace(lo[u_axis], hi[u_axis], nu + 1)
        vs = np.linspace(lo[v_axis], hi[v_axis], nv + 1)
        fixed = hi[axis] if at_max else lo[axis]
        for i in range(nu):
            for j in range(nv):
                quad = []
                for du, dv in ((0, 0), (1, 0), (1, 1), (0, 1)):
                    p = np.empty(3)
                    p[axis] = fixed
                    p[u_axis] = us[i + du]
                    p[v_axis] = vs[j + dv]
                    quad.append(vid(tuple(p)))
                a, b, c, d = quad
                # outward normal: +axis on the max face, -axis on the min face
                if _ccw_is_outward(axis, at_max):
                    faces.extend([[a, b, c], [a, c, d]])
                else:
                    faces.extend([[a, c, b], [a, d, c]])

    grid = {0: (ny, nz), 1: (nx, nz), 2: (nx, ny)}
    for axis in range(3):
        nu, nv = grid[axis]
        add_face_grid(axis, True, nu, nv)
        add_face_grid(axis, False, nu, nv)

    return SurfaceMesh(np.array(vertices), np.array(faces))


def _ccw_is_outward(axis, at_max):
    # quad (u, v) counter-clockwise normal points along +axis cross order;
    # for axis = 1 the remaining axes (0, 2) give a left-handed pair
    normal_sign = -1 if axis == 1 else 1
    return at_max == (normal_sign > 0)


def icosphere(subdivisions=4, radius=1.0, center=(0.0, 0.0, 0.0)):
    """Subdivided icosahedron projected onto the sphere; watertight."""
    phi = (1.0 + np.sqrt(5.0)) / 2.0
    verts = np.array(
        [
            [-1, phi, 0], [1, phi, 0], [-1, -phi, 0], [1, -phi, 0],
            [0, -1, phi], [0, 1, phi], [0, -1, -phi], [0, 1, -phi],
            [phi, 0, -1], [phi, 0, 1], [-phi, 0, -1], [-phi, 0, 1],
        ],
        dtype=float,
    )
    verts /= np.linalg.norm(verts, axis=1)[:, None]
    faces = [
        (0, 11, 5), (0, 5, 1), (0, 1, 7), (0, 7, 10), (0, 10, 11),
        (1, 5, 9), (5, 11, 4), (11, 10, 2), (10, 7, 6), (7, 1, 8),
        (3, 9, 4), (3, 4, 2), (3, 2, 6), (3, 6, 8), (3, 8, 9),
        (4, 9, 5), (2, 4, 11), (6, 2, 10), (8, 6, 7), (9, 8, 1),
    ]

    verts = [tuple(v) for v in verts]
    for _ in range(subdivisions):
        midpoint_cache = {}
        new_faces = []

        def midpoint(a, b):
            key = (min(a, b), max(a, b))
            i = midpoint_cache.get(key)
            if i is None:
                p = (np.array(verts[a]) + np.array(verts[b])) / 2.0
                p /= np.linalg.norm(p)
                i = len(verts)
                verts.append(tuple(p))
                midpoint_cache[key] = i
            return i

        for a, b, c in faces:
            ab, bc, ca = midpoint(a, b), midpoint(b, c), midpoint(c, a)
            new_faces.extend([(a, ab, ca), (b, bc, ab), (c, ca, bc), (ab, bc, ca)])
        faces = new_faces

    vertices = np.array(verts) * radius + np.asarray(center, dtype=float)
    return SurfaceMesh(vertices, np.array(faces))
