"""Gauss quadrature on segments and triangles.

Triangle rules use a Duffy (collapsed square) construction, which is exact
for any requested total polynomial degree with a predictable point count.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np

#: reference triangle (0,0), (1,0), (0,1)
REF_VERTS = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]])


@lru_cache(maxsize=None)
def gauss01(npts):
    """Gauss-Legendre points/weights on [0, 1]."""
    x, w = np.polynomial.legendre.leggauss(npts)
    return 0.5 * (x + 1.0), 0.5 * w


@lru_cache(maxsize=None)
def triangle_rule(order):
    """Points (nq, 2) and weights (nq,) on the reference triangle.

    Exact for all bivariate polynomials of total degree <= order; weights
    sum to the reference area 1/2.
    """
    # after the Duffy map x=s, y=t(1-s) the integrand has degree <= 2*order+1
    # in s (including the (1-s) Jacobian) and <= order in t
    ns = order + 1
    nt = max(1, (order + 2) // 2)
    s, ws = gauss01(ns)
    t, wt = gauss01(nt)
    S, T = np.meshgrid(s, t, indexing="ij")
    WS, WT = np.meshgrid(ws, wt, indexing="ij")
    x = S
    y = T * (1.0 - S)
    w = WS * WT * (1.0 - S)
    pts = np.column_stack([x.ravel(), y.ravel()])
    return pts, w.ravel()


def map_to_triangle(ref_pts, ref_wts, verts):
    """Map a reference rule to the physical triangle `verts` (3, 2)."""
    v0, v1, v2 = np.asarray(verts, dtype=float)
    B = np.column_stack([v1 - v0, v2 - v0])
    det = abs(B[0, 0] * B[1, 1] - B[0, 1] * B[1, 0])
    pts = ref_pts @ B.T + v0
    return pts, ref_wts * det  # ref weights sum to 1/2 = |det| / (2 area)

def segment_rule(p0, p1, npts):
    """Gauss rule on the segment p0-p1; weights sum to the segment length."""
    p0 = np.asarray(p0, dtype=float)
    p1 = np.asarray(p1, dtype=float)
    t, w = gauss01(npts)
    pts = p0[None, :] + t[:, None] * (p1 - p0)[None, :]
    return pts, w * np.linalg.norm(p1 - p0)
