"""Interface representation, phase classification and cut-cell quadrature.

Convention throughout: phi < 0 on the minus phase, phi > 0 on the plus
phase, and the interface unit normal is n = -grad(phi)/|grad(phi)|, which
points from the plus phase into the minus phase.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .quadrature import segment_rule, triangle_rule

MINUS, CUT, PLUS = -1, 0, 1


class GeometryError(Exception):
    pass


class LevelSet:
    """Scalar field phi(x) with gradient; subclasses are vectorized over (n, 2)."""

    def value(self, pts):
        raise NotImplementedError

    def gradient(self, pts):
        raise NotImplementedError

    def normal(self, pts):
        g = self.gradient(np.atleast_2d(pts))
        norms = np.linalg.norm(g, axis=1, keepdims=True)
        if np.any(norms == 0.0):
            raise GeometryError("level-set gradient vanishes on the interface")
        return -g / norms


class CircleLevelSet(LevelSet):
    """phi = |x - c| - R (minus phase inside) or R - |x - c| with inside='plus'."""

    def __init__(self, cx, cy, R, inside="minus"):
        if R <= 0:
            raise GeometryError("circle radius must be positive")
        self.center = np.array([cx, cy], dtype=float)
        self.R = float(R)
        self.sign = 1.0 if inside == "minus" else -1.0

    def value(self, pts):
        d = np.linalg.norm(np.atleast_2d(pts) - self.center, axis=1)
        return self.sign * (d - self.R)

    def gradient(self, pts):
        rel = np.atleast_2d(pts) - self.center
        d = np.linalg.norm(rel, axis=1, keepdims=True)
        d[d == 0.0] = 1.0
        return self.sign * rel / d


class AffineLevelSet(LevelSet):
    """phi = a*x1 + b*x2 + c."""

    def __init__(self, a, b, c):
        self.a, self.b, self.c = float(a), float(b), float(c)

    def value(self, pts):
        pts = np.atleast_2d(pts)
        return self.a * pts[:, 0] + self.b * pts[:, 1] + self.c

    def gradient(self, pts):
        pts = np.atleast_2d(pts)
        return np.broadcast_to(np.array([self.a, self.b]), pts.shape).copy()


NO_INTERFACE = AffineLevelSet(0.0, 0.0, -1.0)


def _ref_lattice(depth):
    m = 2 ** depth
    pts = [(i / m, j / m) for i in range(m + 1) for j in range(m + 1 - i)]
    return np.array(pts)


def _boundary_lattice(depth):
    """Lattice points on the reference triangle boundary, in cyclic order."""
    m = 2 ** depth
    pts = []
    for k in range(m):
        pts.append((k / m, 0.0))
    for k in range(m):
        pts.append(((m - k) / m, k / m))
    for k in range(m):
        pts.append((0.0, (m - k) / m))
    return np.array(pts)


@dataclass
class CutClassification:
    """Per-element phase tags and the derived element/face index sets."""

    mesh: object
    phi: LevelSet
    depth: int
    tags: np.ndarray                 # (nt,) in {MINUS, CUT, PLUS}
    tol: np.ndarray                  # (nt,) sign tolerance used per element
    cut_elements: np.ndarray
    interior_minus: np.ndarray       # T_{h,i}^-
    interior_plus: np.ndarray        # T_{h,i}^+
    elements_minus: np.ndarray       # T_h^-
    elements_plus: np.ndarray        # T_h^+
    ghost_faces_minus: np.ndarray    # E_h^{Gamma,-}
    ghost_faces_plus: np.ndarray     # E_h^{Gamma,+}
    interior_faces_minus: np.ndarray
    interior_faces_plus: np.ndarray
    assumption1_violations: list = field(default_factory=list)

    def has_phase(self, t, sigma):
        tag = self.tags[t]
        return tag == CUT or tag == sigma

    def phase_elements(self, sigma):
        return self.elements_minus if sigma == MINUS else self.elements_plus

    def interior_elements(self, sigma):
        return self.interior_minus if sigma == MINUS else self.interior_plus

    def ghost_faces(self, sigma):
        return self.ghost_faces_minus if sigma == MINUS else self.ghost_faces_plus


def classify(mesh, phi, depth=3):
    """Tag every element as interior minus/plus or cut.

    An element is cut iff phi takes both strict signs (beyond a scale-aware
    tolerance) on the vertices of its depth-`depth` uniform sub-lattice.
    Cut elements whose boundary sign pattern is not a single crossing pair
    abort the run.
    """
    nt = mesh.n_triangles
    lattice = _ref_lattice(depth)
    B, _, _ = mesh.jacobians
    v0 = mesh.vertices[mesh.triangles[:, 0]]
    # physical lattice points for all elements at once
    phys = np.einsum("tij,qj->tqi", B, lattice) + v0[:, None, :]
    vals = phi.value(phys.reshape(-1, 2)).reshape(nt, -1)

    centers = phys.mean(axis=1)
    gnorm = np.linalg.norm(phi.gradient(centers), axis=1)
    tol = 1e-12 * mesh.h_elem * np.maximum(gnorm, 1.0)

    has_neg = (vals < -tol[:, None]).any(axis=1)
    has_pos = (vals > tol[:, None]).any(axis=1)
    tags = np.where(has_neg & has_pos, CUT, np.where(has_pos, PLUS, MINUS))
    # all-zero phi on an element is degenerate
    if np.any(~has_neg & ~has_pos):
        raise GeometryError("level set vanishes identically on an element")

    cut = np.flatnonzero(tags == CUT)

    # single-segment check: exactly 2 sign crossings around the boundary
    if cut.size:
        bl = _boundary_lattice(depth)
        bphys = np.einsum("tij,qj->tqi", B[cut], bl) + v0[cut][:, None, :]
        bvals = phi.value(bphys.reshape(-1, 2)).reshape(cut.size, -1)
        for k, t in enumerate(cut):
            s = np.sign(bvals[k])
            s[np.abs(bvals[k]) <= tol[t]] = 0.0
            s = s[s != 0.0]
            crossings = int(np.count_nonzero(s != np.roll(s, 1))) if s.size else 0
            if crossings != 2:
                raise GeometryError(
                    f"element {t}: interface crosses its boundary {crossings} times; "
                    "resolve the interface: refine mesh"
                )

    interior_minus = np.flatnonzero(tags == MINUS)
    interior_plus = np.flatnonzero(tags == PLUS)
    elements_minus = np.flatnonzero(tags != PLUS)
    elements_plus = np.flatnonzero(tags != MINUS)

    interior = mesh.face_elems[:, 1] != -1
    t1 = mesh.face_elems[:, 0]
    t2 = mesh.face_elems[:, 1]
    ghost, faces_i = {}, {}
    for sigma in (MINUS, PLUS):
        in_phase = tags != (-sigma)
        one_cut = (tags[t1] == CUT) | (tags[t2 % mesh.n_triangles] == CUT)
        ghost[sigma] = np.flatnonzero(interior & in_phase[t1] & in_phase[t2] & one_cut)
        both_int = (tags[t1] == sigma) & (tags[t2 % mesh.n_triangles] == sigma)
        faces_i[sigma] = np.flatnonzero(interior & both_int)

    violations = []
    if cut.size:
        vert_elems = mesh.vertex_elements()
        tri = mesh.triangles
        for t in cut:
            ring1 = set()
            for v in tri[t]:
                ring1.update(vert_elems[v])
            ring2 = set(ring1)
            for e in ring1:
                for v in tri[e]:
                    ring2.update(vert_elems[v])
            for sigma in (MINUS, PLUS):
                if not any(tags[e] == sigma for e in ring2):
                    violations.append((int(t), sigma))

    return CutClassification(
        mesh=mesh,
        phi=phi,
        depth=depth,
        tags=tags,
        tol=tol,
        cut_elements=cut,
        interior_minus=interior_minus,
        interior_plus=interior_plus,
        elements_minus=elements_minus,
        elements_plus=elements_plus,
        ghost_faces_minus=ghost[MINUS],
        ghost_faces_plus=ghost[PLUS],
        interior_faces_minus=faces_i[MINUS],
        interior_faces_plus=faces_i[PLUS],
        assumption1_violations=violations,
    )


def _edge_zero(phi, pa, pb, fa, fb):
    """Zero of phi on the segment pa-pb, bracketed by fa < 0 < fb (either order)."""
    ta, tb = 0.0, 1.0
    t = ta + (tb - ta) * fa / (fa - fb)  # linear interpolation start
    for _ in range(4):
        p = pa + t * (pb - pa)
        f = float(phi.value(p[None, :])[0])
        if f == 0.0:
            break
        if (f < 0.0) == (fa < 0.0):
            ta, fa = t, f
        else:
            tb, fb = t, f
        denom = fa - fb
        t = ta + (tb - ta) * (fa / denom) if denom != 0.0 else 0.5 * (ta + tb)
    return pa + t * (pb - pa)


def _project(phi, p):
    """A few Newton steps moving p onto the zero level set along grad(phi)."""
    p = p.copy()
    for _ in range(3):
        f = float(phi.value(p[None, :])[0])
        g = phi.gradient(p[None, :])[0]
        g2 = float(g @ g)
        if g2 == 0.0:
            break
        p -= f * g / g2
    return p


def _fan(poly):
    """Triangulate a simple, nearly-convex polygon by fanning from its centroid."""
    poly = [np.asarray(p, dtype=float) for p in poly]
    c = np.mean(poly, axis=0)
    n = len(poly)
    return [(c, poly[i], poly[(i + 1) % n]) for i in range(n)]


def _split_leaf(phi, verts, vals, tol):
    """Split a leaf triangle against the interface.

    Returns (minus_tris, plus_tris, interface_segments); the interface is a
    two-segment polyline through the midpoint projected onto {phi = 0},
    which keeps the geometric error second order in the leaf size.
    """
    s = np.where(vals < -tol, -1, np.where(vals > tol, 1, 0))
    if not (np.any(s < 0) and np.any(s > 0)):
        side = -1 if np.any(s < 0) else 1
        return ([tuple(verts)], [], []) if side < 0 else ([], [tuple(verts)], [])

    # interface endpoints on the triangle boundary
    zeros = []          # ("v"/"e", index, point)
    for i in range(3):
        if s[i] == 0:
            zeros.append(("v", i, np.asarray(verts[i], dtype=float)))
    for i in range(3):
        j = (i + 1) % 3
        if s[i] * s[j] < 0:
            zeros.append(("e", i, _edge_zero(phi, np.asarray(verts[i], dtype=float),
                                             np.asarray(verts[j], dtype=float),
                                             vals[i], vals[j])))
    if len(zeros) != 2:
        raise GeometryError("leaf sub-triangle with more than 2 sign changes")

    z1, z2 = zeros[0][2], zeros[1][2]
    m = _project(phi, 0.5 * (z1 + z2))
    segments = [(z1, m), (m, z2)]

    kinds = (zeros[0][0], zeros[1][0])
    if kinds == ("e", "e"):
        i1, i2 = zeros[0][1], zeros[1][1]
        # the vertex shared by both cut edges sits alone on its side
        alone = ({i1, (i1 + 1) % 3} & {i2, (i2 + 1) % 3}).pop()
        o1, o2 = (alone + 1) % 3, (alone + 2) % 3
        # order zeros so the polyline runs z_first (edge alone-o1) -> z_second
        if i1 == alone:      # zeros[0] on edge (alone, o1)
            zf, zs = z1, z2
        else:
            zf, zs = z2, z1
        side_a = _fan([verts[alone], zf, m, zs])
        side_b = _fan([zf, verts[o1], verts[o2], zs, m])
        if s[alone] < 0:
            return side_a, side_b, segments
        return side_b, side_a, segments

    # interface passes through a vertex and the opposite edge
    vz = zeros[0] if zeros[0][0] == "v" else zeros[1]
    ez = zeros[1] if zeros[0][0] == "v" else zeros[0]
    iv = vz[1]
    i, j = (iv + 1) % 3, (iv + 2) % 3
    side_i = _fan([verts[iv], verts[i], ez[2], m])
    side_j = _fan([verts[iv], m, ez[2], verts[j]])
    if s[i] < 0:
        return side_i, side_j, segments
    return side_j, side_i, segments


def _area(a, b, c):
    return 0.5 * abs((b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]))


def _subdivide(phi, verts, depth, tol, minus_tris, plus_tris, segments):
    a, b, c = verts
    pts = np.array([a, b, c])
    # probe the remaining sub-lattice to decide whether this node is cut
    lat = _ref_lattice(depth) if depth > 0 else np.array([[0, 0], [1, 0], [0, 1]], dtype=float)
    B = np.column_stack([b - a, c - a])
    phys = lat @ B.T + a
    vals = phi.value(phys)
    if not ((vals < -tol).any() and (vals > tol).any()):
        side = -1 if (vals < -tol).any() else 1
        (minus_tris if side < 0 else plus_tris).append((a, b, c))
        return
    if depth == 0:
        vvals = phi.value(pts)
        if not ((vvals < -tol).any() and (vvals > tol).any()):
            raise GeometryError(
                "interface not resolved at leaf level; resolve the interface: refine mesh"
            )
        mt, pt, seg = _split_leaf(phi, [a, b, c], vvals, tol)
        minus_tris.extend(mt)
        plus_tris.extend(pt)
        segments.extend(seg)
        return
    ab, bc, ca = 0.5 * (a + b), 0.5 * (b + c), 0.5 * (c + a)
    for child in ((a, ab, ca), (ab, b, bc), (ca, bc, c), (ab, bc, ca)):
        _subdivide(phi, child, depth - 1, tol, minus_tris, plus_tris, segments)


@dataclass
class CutQuadrature:
    """Per-element quadrature for the two subdomains and the interface."""

    mesh: object
    classification: CutClassification
    depth: int
    order: int
    minus_rules: dict      # elem -> (pts, wts) on T n Omega^-
    plus_rules: dict       # elem -> (pts, wts) on T n Omega^+
    interface_rules: dict  # elem -> (pts, wts, normals) on T_Gamma

    def side_rule(self, t, sigma):
        """Quadrature for T n Omega^sigma; full-element rule on uncut elements."""
        tag = self.classification.tags[t]
        if tag == CUT:
            rules = self.minus_rules if sigma == MINUS else self.plus_rules
            return rules[t]
        if tag != sigma:
            return np.zeros((0, 2)), np.zeros(0)
        return self.full_rule(t)

    def full_rule(self, t):
        ref_pts, ref_wts = triangle_rule(self.order)
        B, _, det = self.mesh.jacobians
        pts = ref_pts @ B[t].T + self.mesh.vertices[self.mesh.triangles[t, 0]]
        return pts, ref_wts * abs(det[t])

    def interface_rule(self, t):
        return self.interface_rules.get(t, (np.zeros((0, 2)), np.zeros(0), np.zeros((0, 2))))


def cut_quadrature(mesh, classification, phi, depth=4, order=4):
    """Build subdomain and interface quadrature rules for all cut elements.

    Cut elements are recursively subdivided `depth` times (midpoint 4-way);
    leaves are split against a two-segment polyline through the edge zeros
    of phi and their projected midpoint, then fan-triangulated and equipped
    with order-`order` Duffy rules.
    """
    ref_pts, ref_wts = triangle_rule(order)
    n1d = max(2, (order + 2) // 2 + 1)
    minus_rules, plus_rules, interface_rules = {}, {}, {}
    areas = mesh.areas
    for t in classification.cut_elements:
        verts = mesh.cell_vertices(t)
        tol = classification.tol[t]
        minus_tris, plus_tris, segments = [], [], []
        _subdivide(phi, (verts[0], verts[1], verts[2]), depth, tol,
                   minus_tris, plus_tris, segments)

        out = {}
        for side, tris in ((MINUS, minus_tris), (PLUS, plus_tris)):
            if not tris:
                out[side] = (np.zeros((0, 2)), np.zeros(0))
                continue
            pts_all, wts_all = [], []
            for (pa, pb, pc) in tris:
                ar = _area(pa, pb, pc)
                if ar == 0.0:
                    continue
                B = np.column_stack([np.asarray(pb) - pa, np.asarray(pc) - pa])
                pts_all.append(ref_pts @ B.T + pa)
                wts_all.append(ref_wts * 2.0 * ar)  # |det| = 2*area
            out[side] = (np.vstack(pts_all), np.concatenate(wts_all))
        minus_rules[t], plus_rules[t] = out[MINUS], out[PLUS]

        ipts, iwts = [], []
        for (pa, pb) in segments:
            p, w = segment_rule(pa, pb, n1d)
            ipts.append(p)
            iwts.append(w)
        ipts = np.vstack(ipts)
        iwts = np.concatenate(iwts)
        normals = phi.normal(ipts)
        interface_rules[t] = (ipts, iwts, normals)

        wsum = minus_rules[t][1].sum() + plus_rules[t][1].sum()
        if abs(wsum - areas[t]) > 1e-10 * areas[t]:
            raise GeometryError(f"element {t}: cut weights sum to {wsum}, area {areas[t]}")

    return CutQuadrature(
        mesh=mesh,
        classification=classification,
        depth=depth,
        order=order,
        minus_rules=minus_rules,
        plus_rules=plus_rules,
        interface_rules=interface_rules,
    )
