"""Finite element pairs and the doubled degree-of-freedom map.

Each phase carries its own copy of the velocity/pressure space, supported
on the elements that intersect that phase; elements crossed by the
interface therefore hold two sets of unknowns.  The global ordering is
[velocity minus | velocity plus | pressure minus | pressure plus], with
the two velocity components of a node stored contiguously.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .geometry import MINUS, PLUS
from .poly import Poly2

# barycentric coordinates on the reference triangle (0,0), (1,0), (0,1)
_L0 = Poly2([[1.0, -1.0], [-1.0, 0.0]])
_L1 = Poly2([[0.0, 0.0], [1.0, 0.0]])
_L2 = Poly2([[0.0, 1.0]])


@dataclass(frozen=True)
class ReferenceElement:
    """Scalar reference element: nodes tied to mesh entities plus a basis.

    `nodes` lists (kind, index) pairs with kind in {"vertex", "edge",
    "cell"}; vertex/edge indices are local (edge i is opposite vertex i).
    """

    name: str
    degree: int
    nodes: tuple
    node_ref: np.ndarray     # (nn, 2) reference coordinates of the nodes
    basis: tuple             # matching Poly2 shape functions
    continuous: bool

    @property
    def n_nodes(self):
        return len(self.nodes)


def _make_p0():
    return ReferenceElement(
        name="P0",
        degree=0,
        nodes=(("cell", 0),),
        node_ref=np.array([[1 / 3, 1 / 3]]),
        basis=(Poly2([[1.0]]),),
        continuous=False,
    )


def _make_p1():
    return ReferenceElement(
        name="P1",
        degree=1,
        nodes=(("vertex", 0), ("vertex", 1), ("vertex", 2)),
        node_ref=np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]]),
        basis=(_L0, _L1, _L2),
        continuous=True,
    )


def _make_p2():
    verts = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]])
    mids = np.array([[0.5, 0.5], [0.0, 0.5], [0.5, 0.0]])  # midpoint opposite vertex i
    L = (_L0, _L1, _L2)
    vert_basis = tuple(Li * (2.0 * Li - Poly2([[1.0]])) for Li in L)
    edge_basis = tuple(4.0 * L[(i + 1) % 3] * L[(i + 2) % 3] for i in range(3))
    return ReferenceElement(
        name="P2",
        degree=2,
        nodes=tuple(("vertex", i) for i in range(3)) + tuple(("edge", i) for i in range(3)),
        node_ref=np.vstack([verts, mids]),
        basis=vert_basis + edge_basis,
        continuous=True,
    )


def _make_p1_bubble():
    verts = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [1 / 3, 1 / 3]])
    bubble = 27.0 * _L0 * _L1 * _L2  # equals 1 at the barycenter
    return ReferenceElement(
        name="P1b",
        degree=3,
        nodes=tuple(("vertex", i) for i in range(3)) + (("cell", 0),),
        node_ref=verts,
        basis=(_L0, _L1, _L2, bubble),
        continuous=True,
    )


@dataclass(frozen=True)
class ElementPair:
    """Inf-sup stable velocity/pressure pair with its stabilization orders.

    `ghost_orders_u` is the highest normal-derivative order entering the
    velocity face penalty; the pressure penalty runs up to order `k_p`.
    """

    name: str
    velocity: ReferenceElement
    pressure: ReferenceElement
    k_u: int
    ghost_orders_u: int
    k_p: int


def element_pair(name):
    key = name.lower().replace("-", "").replace("_", "")
    if key == "mini":
        return ElementPair("mini", _make_p1_bubble(), _make_p1(), k_u=1,
                           ghost_orders_u=3, k_p=1)
    if key == "p2p0":
        return ElementPair("p2p0", _make_p2(), _make_p0(), k_u=2,
                           ghost_orders_u=2, k_p=0)
    raise ValueError(f"unknown element pair {name!r}; choose 'mini' or 'p2p0'")


_TAB_CACHE = {}


def eval_basis(element, pts):
    """Tabulate (values, gradients) of all shape functions at reference points.

    Returns vals (nn, nq) and grads (nn, nq, 2); results are cached on the
    (element, points) pair.
    """
    pts = np.asarray(pts, dtype=float)
    key = (element.name, pts.shape[0], pts.tobytes())
    hit = _TAB_CACHE.get(key)
    if hit is not None:
        return hit
    nn, nq = element.n_nodes, pts.shape[0]
    vals = np.empty((nn, nq))
    grads = np.empty((nn, nq, 2))
    x, y = pts[:, 0], pts[:, 1]
    for a, p in enumerate(element.basis):
        vals[a] = p(x, y)
        grads[a, :, 0] = p.dx()(x, y)
        grads[a, :, 1] = p.dy()(x, y)
    _TAB_CACHE[key] = (vals, grads)
    return vals, grads


def _number_phase_nodes(mesh, element, active):
    """Phase-local node numbering for one scalar space.

    Returns (elem_nodes, n_nodes, coords, on_boundary): elem_nodes is
    (nt, nn) with -1 on inactive elements; coords holds physical node
    positions; on_boundary flags nodes sitting on the outer boundary.
    """
    nt = mesh.n_triangles
    nn = element.n_nodes
    elem_nodes = np.full((nt, nn), -1, dtype=np.int64)

    vert_ids = {}
    edge_ids = {}
    records = []  # (coords, on_boundary) in numbering order

    B, _, _ = mesh.jacobians
    v0 = mesh.vertices[mesh.triangles[:, 0]]
    for t in active:
        tri = mesh.triangles[t]
        for a, (kind, idx) in enumerate(element.nodes):
            if kind == "vertex":
                v = int(tri[idx])
                node = vert_ids.get(v)
                if node is None:
                    node = len(records)
                    vert_ids[v] = node
                    records.append((mesh.vertices[v], bool(mesh.boundary_vertex[v])))
            elif kind == "edge":
                f = int(mesh.elem_faces[t, idx])
                node = edge_ids.get(f)
                if node is None:
                    node = len(records)
                    edge_ids[f] = node
                    xy = B[t] @ element.node_ref[a] + v0[t]
                    records.append((xy, bool(mesh.boundary_face[f])))
            else:  # per-cell node, never shared and never on the boundary
                node = len(records)
                xy = B[t] @ element.node_ref[a] + v0[t]
                records.append((xy, False))
            elem_nodes[t, a] = node

    n_nodes = len(records)
    coords = np.array([r[0] for r in records]) if records else np.zeros((0, 2))
    on_boundary = np.array([r[1] for r in records], dtype=bool)
    return elem_nodes, n_nodes, coords, on_boundary


@dataclass
class DofMap:
    """Global unknown numbering over both phase copies of the pair."""

    mesh: object
    classification: object
    pair: ElementPair
    n_dofs: int
    n_u: int
    n_p: int
    u_offset: dict           # phase -> first velocity dof of that block
    p_offset: dict           # phase -> first pressure dof of that block
    n_u_nodes: dict          # phase -> scalar velocity node count
    n_p_nodes: dict
    u_elem_dofs: dict        # phase -> (nt, 2*nn_u) global dofs, -1 inactive
    p_elem_dofs: dict        # phase -> (nt, nn_p)
    dirichlet_mask: np.ndarray
    dof_coords: np.ndarray
    dof_component: np.ndarray  # 0/1 for velocity dofs, -1 for pressure

    def velocity_dofs(self, t, sigma):
        dofs = self.u_elem_dofs[sigma][t]
        if dofs[0] < 0:
            raise IndexError(f"element {t} carries no phase {sigma} velocity dofs")
        return dofs

    def pressure_dofs(self, t, sigma):
        dofs = self.p_elem_dofs[sigma][t]
        if dofs[0] < 0:
            raise IndexError(f"element {t} carries no phase {sigma} pressure dofs")
        return dofs

    @property
    def dirichlet_dofs(self):
        return np.flatnonzero(self.dirichlet_mask)


def build_space(mesh, classification, pair):
    """Number all unknowns of the doubled pair on a classified mesh."""
    u_nodes, p_nodes = {}, {}
    for sigma in (MINUS, PLUS):
        active = classification.phase_elements(sigma)
        u_nodes[sigma] = _number_phase_nodes(mesh, pair.velocity, active)
        p_nodes[sigma] = _number_phase_nodes(mesh, pair.pressure, active)

    n_u_nodes = {s: u_nodes[s][1] for s in (MINUS, PLUS)}
    n_p_nodes = {s: p_nodes[s][1] for s in (MINUS, PLUS)}
    n_u = 2 * (n_u_nodes[MINUS] + n_u_nodes[PLUS])
    n_p = n_p_nodes[MINUS] + n_p_nodes[PLUS]
    u_offset = {MINUS: 0, PLUS: 2 * n_u_nodes[MINUS]}
    p_offset = {MINUS: n_u, PLUS: n_u + n_p_nodes[MINUS]}
    n_dofs = n_u + n_p

    dof_coords = np.zeros((n_dofs, 2))
    dirichlet_mask = np.zeros(n_dofs, dtype=bool)
    dof_component = np.full(n_dofs, -1, dtype=np.int64)
    u_elem_dofs, p_elem_dofs = {}, {}

    for sigma in (MINUS, PLUS):
        elem_nodes, nn, coords, on_bdry = u_nodes[sigma]
        off = u_offset[sigma]
        for comp in (0, 1):
            idx = off + 2 * np.arange(nn) + comp
            dof_coords[idx] = coords
            dirichlet_mask[idx] = on_bdry
            dof_component[idx] = comp
        dofs = np.full((mesh.n_triangles, 2 * pair.velocity.n_nodes), -1, dtype=np.int64)
        act = elem_nodes[:, 0] >= 0
        for a in range(pair.velocity.n_nodes):
            dofs[act, 2 * a] = off + 2 * elem_nodes[act, a]
            dofs[act, 2 * a + 1] = off + 2 * elem_nodes[act, a] + 1
        u_elem_dofs[sigma] = dofs

        elem_nodes, nn, coords, _ = p_nodes[sigma]
        off = p_offset[sigma]
        dof_coords[off : off + nn] = coords
        dofs = np.full((mesh.n_triangles, pair.pressure.n_nodes), -1, dtype=np.int64)
        act = elem_nodes[:, 0] >= 0
        for a in range(pair.pressure.n_nodes):
            dofs[act, a] = off + elem_nodes[act, a]
        p_elem_dofs[sigma] = dofs

    return DofMap(
        mesh=mesh,
        classification=classification,
        pair=pair,
        n_dofs=n_dofs,
        n_u=n_u,
        n_p=n_p,
        u_offset=u_offset,
        p_offset=p_offset,
        n_u_nodes=n_u_nodes,
        n_p_nodes=n_p_nodes,
        u_elem_dofs=u_elem_dofs,
        p_elem_dofs=p_elem_dofs,
        dirichlet_mask=dirichlet_mask,
        dof_coords=dof_coords,
        dof_component=dof_component,
    )
