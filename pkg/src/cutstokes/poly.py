"""Bivariate polynomials in monomial form.

Basis functions are stored as exact monomial coefficient matrices so that
derivatives of any order (needed for the face-jump penalties) can be taken
by coefficient manipulation instead of finite differencing.
"""

from __future__ import annotations

import numpy as np


class Poly2:
    """Polynomial sum_ij c[i, j] * x^i * y^j on the reference triangle."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs):
        self.coeffs = np.atleast_2d(np.asarray(coeffs, dtype=float))

    @classmethod
    def zero(cls):
        return cls([[0.0]])

    @property
    def degree(self):
        c = self.coeffs
        deg = 0
        for i in range(c.shape[0]):
            for j in range(c.shape[1]):
                if c[i, j] != 0.0:
                    deg = max(deg, i + j)
        return deg

    def __add__(self, other):
        a, b = self.coeffs, other.coeffs
        ni = max(a.shape[0], b.shape[0])
        nj = max(a.shape[1], b.shape[1])
        out = np.zeros((ni, nj))
        out[: a.shape[0], : a.shape[1]] += a
        out[: b.shape[0], : b.shape[1]] += b
        return Poly2(out)

    def __sub__(self, other):
        return self + (other * -1.0)

    def __mul__(self, other):
        if isinstance(other, Poly2):
            a, b = self.coeffs, other.coeffs
            out = np.zeros((a.shape[0] + b.shape[0] - 1, a.shape[1] + b.shape[1] - 1))
            for i in range(a.shape[0]):
                for j in range(a.shape[1]):
                    if a[i, j] != 0.0:
                        out[i : i + b.shape[0], j : j + b.shape[1]] += a[i, j] * b
            return Poly2(out)
        return Poly2(self.coeffs * float(other))

    __rmul__ = __mul__

    def dx(self):
        c = self.coeffs
        if c.shape[0] == 1:
            return Poly2.zero()
        i = np.arange(1, c.shape[0])
        return Poly2(c[1:, :] * i[:, None])

    def dy(self):
        c = self.coeffs
        if c.shape[1] == 1:
            return Poly2.zero()
        j = np.arange(1, c.shape[1])
        return Poly2(c[:, 1:] * j[None, :])

    def directional(self, d):
        """Derivative along the (reference-space) direction d."""
        return Poly2(d[0] * self.dx().coeffs) + Poly2(d[1] * self.dy().coeffs)

    def directional_n(self, d, order):
        p = self
        for _ in range(order):
            p = p.directional(d)
        return p

    def __call__(self, x, y):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        c = self.coeffs
        # Horner in x of Horner-in-y rows
        out = np.zeros(np.broadcast(x, y).shape)
        for i in range(c.shape[0] - 1, -1, -1):
            row = np.zeros_like(out)
            for j in range(c.shape[1] - 1, -1, -1):
                row = row * y + c[i, j]
            out = out * x + row
        return out


def poly_from_nodal(nodes, exps, values):
    """Polynomial with prescribed values at nodes, in the monomial span `exps`.

    `exps` is a list of (i, j) exponent pairs, `nodes` an (n, 2) array and
    `values` the target nodal values; n must equal len(exps).
    """
    nodes = np.asarray(nodes, dtype=float)
    V = np.array([[x ** i * y ** j for (i, j) in exps] for x, y in nodes])
    coef = np.linalg.solve(V, np.asarray(values, dtype=float))
    ni = max(i for i, _ in exps) + 1
    nj = max(j for _, j in exps) + 1
    c = np.zeros((ni, nj))
    for (i, j), a in zip(exps, coef):
        c[i, j] = a
    return Poly2(c)
