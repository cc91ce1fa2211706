"""Lagrange basis on the reference triangle, with derivatives of any order.

The reference triangle has vertices (0,0), (1,0), (0,1).  Nodes are the
lattice points at spacing 1/k, ordered vertices first, then the interior
nodes of the three edges (edge i runs from local vertex (i+1)%3 to
(i+2)%3), then the cell-interior nodes.  The basis is expressed in the
monomial basis through the inverse Vandermonde matrix, which is perfectly
adequate for the moderate degrees (k <= 6) used here.
"""

from __future__ import annotations

from functools import lru_cache
from math import factorial

import numpy as np

from ..errors import ParameterError

_MAX_DEGREE = 8


class ReferenceTriangle:
    """Nodes, monomial exponents and basis coefficients for P_k."""

    def __init__(self, degree):
        if not 1 <= degree <= _MAX_DEGREE:
            raise ParameterError(f"degree must be in [1, {_MAX_DEGREE}], got {degree}")
        self.degree = k = degree

        verts = [(0.0, 0.0), (1.0, 0.0), (0.0, 1.0)]
        nodes = list(verts)
        self.edge_nodes = []
        for i in range(3):
            a = np.array(verts[(i + 1) % 3])
            b = np.array(verts[(i + 2) % 3])
            idxs = []
            for s in range(1, k):
                idxs.append(len(nodes))
                nodes.append(tuple(a + (s / k) * (b - a)))
            self.edge_nodes.append(idxs)
        self.interior_nodes = []
        for i in range(1, k):
            for j in range(1, k - i):
                self.interior_nodes.append(len(nodes))
                nodes.append((i / k, j / k))
        self.nodes = np.array(nodes)
        self.n_nodes = len(nodes)

        exps = [(a, b) for a in range(k + 1) for b in range(k + 1 - a)]
        self.exponents = np.array(exps, dtype=np.int64)
        V = self._monomials(self.nodes, (0, 0))
        self.coefficients = np.linalg.inv(V)

    def _monomials(self, pts, deriv):
        """Evaluate D^deriv of every monomial at pts; pts shape (..., 2)."""
        a, b = deriv
        pts = np.asarray(pts, dtype=float)
        x = pts[..., 0]
        y = pts[..., 1]
        out = np.empty(x.shape + (len(self.exponents),))
        for m, (p, q) in enumerate(self.exponents):
            if p < a or q < b:
                out[..., m] = 0.0
                continue
            coef = factorial(p) // factorial(p - a) * (factorial(q) // factorial(q - b))
            out[..., m] = coef * x ** (p - a) * y ** (q - b)
        return out

    def eval(self, pts, deriv=(0, 0)):
        """Values of D^deriv of all basis functions at pts; shape (..., n_nodes)."""
        return self._monomials(pts, deriv) @ self.coefficients


@lru_cache(maxsize=None)
def reference_triangle(degree):
    return ReferenceTriangle(degree)
