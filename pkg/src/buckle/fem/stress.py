"""In-plane stress fields feeding the buckling pencil.

Two kinds: a prescribed constant symmetric tensor (zero divergence), and a
field derived elementwise from a membrane displacement solution, i.e. a
per-element polynomial of degree k_M - 1.  Both expose pointwise values and
divergence at reference points of selected triangles.
"""

from __future__ import annotations

import numpy as np

from ..errors import ParameterError
from .space import evaluate_deriv


class PrescribedStress:
    """Constant symmetric 2x2 stress tensor prescribed in closed form."""

    kind = "prescribed"
    degree = 0

    def __init__(self, tensor):
        tensor = np.asarray(tensor, dtype=float)
        if tensor.shape != (2, 2):
            raise ParameterError("prescribed stress must be a 2x2 tensor")
        if abs(tensor[0, 1] - tensor[1, 0]) > 1e-14 * max(1.0, abs(tensor).max()):
            raise ParameterError("prescribed stress must be symmetric")
        tensor = 0.5 * (tensor + tensor.T)
        tensor.setflags(write=False)
        self.tensor = tensor

    @classmethod
    def unit(cls):
        return cls(np.eye(2))

    def evaluate(self, tris, ref_pts):
        npts = np.asarray(ref_pts).shape[-2]
        out = np.empty((len(tris), npts, 2, 2))
        out[...] = self.tensor
        return out

    def divergence(self, tris, ref_pts):
        npts = np.asarray(ref_pts).shape[-2]
        return np.zeros((len(tris), npts, 2))


class FeStress:
    """Stress of a membrane displacement: sigma = 2 mu eps + lambda tr(eps) I."""

    kind = "fe"

    def __init__(self, space, U, mat):
        if space.n_components != 2:
            raise ParameterError("membrane stress needs a 2-component space")
        U = np.asarray(U, dtype=float)
        if U.shape != (space.n_dofs,):
            raise ParameterError("displacement vector does not match the space")
        self.space = space
        self.U = U
        self.mat = mat
        self.degree = space.degree - 1

    def evaluate(self, tris, ref_pts):
        dux = evaluate_deriv(self.space, self.U, tris, ref_pts, (1, 0))
        duy = evaluate_deriv(self.space, self.U, tris, ref_pts, (0, 1))
        mu, lam = self.mat.mu, self.mat.lam
        exx = dux[..., 0]
        eyy = duy[..., 1]
        exy = 0.5 * (duy[..., 0] + dux[..., 1])
        tr = exx + eyy
        out = np.empty(exx.shape + (2, 2))
        out[..., 0, 0] = 2.0 * mu * exx + lam * tr
        out[..., 1, 1] = 2.0 * mu * eyy + lam * tr
        out[..., 0, 1] = 2.0 * mu * exy
        out[..., 1, 0] = out[..., 0, 1]
        return out

    def divergence(self, tris, ref_pts):
        # (div sigma)_i = mu Lap(u_i) + (mu + lambda) d_i (div u)
        uxx = evaluate_deriv(self.space, self.U, tris, ref_pts, (2, 0))
        uyy = evaluate_deriv(self.space, self.U, tris, ref_pts, (0, 2))
        uxy = evaluate_deriv(self.space, self.U, tris, ref_pts, (1, 1))
        mu, lam = self.mat.mu, self.mat.lam
        lap = uxx + uyy
        out = np.empty(lap.shape[:-1] + (2,))
        out[..., 0] = mu * lap[..., 0] + (mu + lam) * (uxx[..., 0] + uxy[..., 1])
        out[..., 1] = mu * lap[..., 1] + (mu + lam) * (uxy[..., 0] + uyy[..., 1])
        return out


def stress_from_displacement(U_M, space, mat):
    """Per-element polynomial stress field of a membrane solution."""
    return FeStress(space, U_M, mat)
