"""Background triangulations of a rectangle and their face adjacency."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


class MeshError(Exception):
    pass


@dataclass(frozen=True)
class TriMesh:
    """Immutable triangulation with face adjacency.

    faces[f] stores the two vertex ids of face f (sorted); face_elems[f]
    stores the adjacent element ids, lower element first, with -1 in the
    second slot for boundary faces.  The canonical face normal points from
    face_elems[f][0] into face_elems[f][1]; all jump penalties are quadratic
    in the jump, so this sign choice is immaterial.
    """

    vertices: np.ndarray          # (nv, 2)
    triangles: np.ndarray         # (nt, 3), CCW
    faces: np.ndarray             # (nf, 2) vertex ids
    face_elems: np.ndarray        # (nf, 2), -1 marks boundary
    elem_faces: np.ndarray        # (nt, 3), face opposite local vertex i
    h_elem: np.ndarray            # (nt,) diameters
    face_length: np.ndarray       # (nf,)
    boundary_vertex: np.ndarray   # (nv,) bool
    boundary_face: np.ndarray     # (nf,) bool
    kappa: float                  # max over elements of h_T / rho_T
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    @property
    def n_vertices(self):
        return self.vertices.shape[0]

    @property
    def n_triangles(self):
        return self.triangles.shape[0]

    @property
    def n_faces(self):
        return self.faces.shape[0]

    @property
    def h(self):
        return float(self.h_elem.max())

    def cell_vertices(self, t):
        return self.vertices[self.triangles[t]]

    @property
    def areas(self):
        if "areas" not in self._cache:
            v = self.vertices[self.triangles]
            self._cache["areas"] = 0.5 * np.abs(
                (v[:, 1, 0] - v[:, 0, 0]) * (v[:, 2, 1] - v[:, 0, 1])
                - (v[:, 2, 0] - v[:, 0, 0]) * (v[:, 1, 1] - v[:, 0, 1])
            )
        return self._cache["areas"]

    @property
    def jacobians(self):
        """Affine maps x = B xi + x0 per element: (B, Binv, det) arrays."""
        if "jac" not in self._cache:
            v = self.vertices[self.triangles]
            B = np.stack([v[:, 1] - v[:, 0], v[:, 2] - v[:, 0]], axis=-1)
            det = B[:, 0, 0] * B[:, 1, 1] - B[:, 0, 1] * B[:, 1, 0]
            Binv = np.empty_like(B)
            Binv[:, 0, 0] = B[:, 1, 1] / det
            Binv[:, 0, 1] = -B[:, 0, 1] / det
            Binv[:, 1, 0] = -B[:, 1, 0] / det
            Binv[:, 1, 1] = B[:, 0, 0] / det
            self._cache["jac"] = (B, Binv, det)
        return self._cache["jac"]

    def vertex_elements(self):
        """List of element ids touching each vertex."""
        if "vertex_elements" not in self._cache:
            out = [[] for _ in range(self.n_vertices)]
            for t, tri in enumerate(self.triangles):
                for v in tri:
                    out[v].append(t)
            self._cache["vertex_elements"] = out
        return self._cache["vertex_elements"]


def face_neighbors(mesh, face):
    """Adjacent elements of a face; second entry is -1 on the boundary."""
    if face < 0 or face >= mesh.n_faces:
        raise MeshError(f"invalid face index {face}")
    e0, e1 = mesh.face_elems[face]
    return int(e0), int(e1)


def _build_connectivity(vertices, triangles):
    vertices = np.asarray(vertices, dtype=float)
    triangles = np.asarray(triangles, dtype=np.int64)
    nt = triangles.shape[0]

    v = vertices[triangles]
    signed = 0.5 * (
        (v[:, 1, 0] - v[:, 0, 0]) * (v[:, 2, 1] - v[:, 0, 1])
        - (v[:, 2, 0] - v[:, 0, 0]) * (v[:, 1, 1] - v[:, 0, 1])
    )
    if np.any(signed <= 0):
        raise MeshError("every triangle must be CCW with positive area")

    face_index = {}
    faces = []
    face_elems = []
    elem_faces = np.empty((nt, 3), dtype=np.int64)
    for t in range(nt):
        tri = triangles[t]
        for i in range(3):
            a, b = tri[(i + 1) % 3], tri[(i + 2) % 3]
            key = (min(a, b), max(a, b))
            f = face_index.get(key)
            if f is None:
                f = len(faces)
                face_index[key] = f
                faces.append(key)
                face_elems.append([t, -1])
            else:
                if face_elems[f][1] != -1:
                    raise MeshError("face shared by more than 2 triangles")
                face_elems[f][1] = t
            elem_faces[t, i] = f
    faces = np.array(faces, dtype=np.int64)
    face_elems = np.array(face_elems, dtype=np.int64)
    # canonical ordering: lower element id first
    for f in range(face_elems.shape[0]):
        e0, e1 = face_elems[f]
        if e1 != -1 and e1 < e0:
            face_elems[f] = (e1, e0)

    edge_vecs = vertices[triangles[:, [1, 2, 0]]] - vertices[triangles[:, [0, 1, 2]]]
    edge_len = np.linalg.norm(edge_vecs, axis=2)
    h_elem = edge_len.max(axis=1)
    rho = 2.0 * signed / edge_len.sum(axis=1)
    kappa = float((h_elem / rho).max())

    face_length = np.linalg.norm(vertices[faces[:, 0]] - vertices[faces[:, 1]], axis=1)
    boundary_face = face_elems[:, 1] == -1
    boundary_vertex = np.zeros(vertices.shape[0], dtype=bool)
    boundary_vertex[faces[boundary_face].ravel()] = True

    return TriMesh(
        vertices=vertices,
        triangles=triangles,
        faces=faces,
        face_elems=face_elems,
        elem_faces=elem_faces,
        h_elem=h_elem,
        face_length=face_length,
        boundary_vertex=boundary_vertex,
        boundary_face=boundary_face,
        kappa=kappa,
    )


def build_uniform_diagonal_mesh(domain, n):
    """Uniform diagonal triangulation of an axis-aligned rectangle.

    `domain` is (x0, x1, y0, y1); every one of the n x n cells is split
    along the same diagonal, giving 2*n*n triangles and (n+1)**2 vertices.
    """
    x0, x1, y0, y1 = map(float, domain)
    if n < 1:
        raise MeshError("n must be >= 1")
    if not (x1 > x0 and y1 > y0):
        raise MeshError("degenerate rectangle")

    xs = np.linspace(x0, x1, n + 1)
    ys = np.linspace(y0, y1, n + 1)
    X, Y = np.meshgrid(xs, ys, indexing="ij")
    vertices = np.column_stack([X.ravel(), Y.ravel()])

    def vid(i, j):
        return i * (n + 1) + j

    triangles = []
    for i in range(n):
        for j in range(n):
            v00, v10 = vid(i, j), vid(i + 1, j)
            v01, v11 = vid(i, j + 1), vid(i + 1, j + 1)
            triangles.append([v00, v10, v11])
            triangles.append([v00, v11, v01])
    return _build_connectivity(vertices, np.array(triangles, dtype=np.int64))


def read_mesh(path):
    """Read the plain-text mesh format: `NV NT`, NV `x y` lines, NT CCW triangles."""
    with open(path) as fh:
        tokens = fh.read().split()
    nv, nt = int(tokens[0]), int(tokens[1])
    need = 2 + 2 * nv + 3 * nt
    if len(tokens) != need:
        raise MeshError(f"mesh file: expected {need} tokens, found {len(tokens)}")
    coords = np.array(tokens[2 : 2 + 2 * nv], dtype=float).reshape(nv, 2)
    tris = np.array(tokens[2 + 2 * nv :], dtype=np.int64).reshape(nt, 3)
    return _build_connectivity(coords, tris)


def write_mesh(mesh, path):
    with open(path, "w") as fh:
        fh.write(f"{mesh.n_vertices} {mesh.n_triangles}\n")
        for x, y in mesh.vertices:
            fh.write(f"{x!r} {y!r}\n")
        for a, b, c in mesh.triangles:
            fh.write(f"{a} {b} {c}\n")
