"""Quadrature rules on the reference triangle and the unit interval.

Triangle rules are exact for polynomials of total degree <= order, have
positive weights, and sum to the reference area 1/2.  Order 1 is the single
centroid point, order 2 the classical symmetric 3-point rule; higher orders
use a collapsed Gauss-Legendre product (Duffy transform), which keeps the
weights positive at every order.
"""

from __future__ import annotations

import numpy as np
from numpy.polynomial.legendre import leggauss

from ..errors import ParameterError

_MAX_ORDER = 30


def triangle_quadrature(order):
    """Points (n, 2) and weights (n,) on the reference triangle."""
    if not isinstance(order, (int, np.integer)) or order < 1:
        raise ParameterError(f"quadrature order must be a positive integer, got {order}")
    if order > _MAX_ORDER:
        raise ParameterError(f"quadrature order {order} unsupported (max {_MAX_ORDER})")
    if order == 1:
        return np.array([[1.0 / 3.0, 1.0 / 3.0]]), np.array([0.5])
    if order == 2:
        pts = np.array([[1 / 6, 1 / 6], [2 / 3, 1 / 6], [1 / 6, 2 / 3]])
        return pts, np.full(3, 1 / 6)
    # Duffy: x = xi, y = eta (1 - xi); the (1 - xi) Jacobian raises the xi
    # degree by one, hence n Gauss points per direction with 2n-1 >= order+1.
    n = (order + 3) // 2
    g, w = leggauss(n)
    g = 0.5 * (g + 1.0)
    w = 0.5 * w
    xi, eta = np.meshgrid(g, g, indexing="ij")
    wx, wy = np.meshgrid(w, w, indexing="ij")
    x = xi.ravel()
    y = (eta * (1.0 - xi)).ravel()
    weights = (wx * wy * (1.0 - xi)).ravel()
    return np.column_stack([x, y]), weights


def edge_quadrature(order):
    """Gauss-Legendre points/weights on [0, 1], exact to degree ``order``."""
    if not isinstance(order, (int, np.integer)) or order < 1:
        raise ParameterError(f"quadrature order must be a positive integer, got {order}")
    n = order // 2 + 1
    g, w = leggauss(n)
    return 0.5 * (g + 1.0), 0.5 * w
