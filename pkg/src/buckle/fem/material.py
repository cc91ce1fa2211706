"""Isotropic material data for the membrane (plane stress) and the plate.

The plane-stress Lame parameters follow the standard relations
mu = E / (2 (1 + nu)) and lambda = E nu / (1 - nu^2).  An alternative
"swapped" convention (lambda = E / (1 + nu), mu = E nu / (1 - nu^2)) is
selectable for comparison runs but is not the default.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import ParameterError

LAME_VARIANTS = ("standard", "swapped")


def lame_plane_stress(E, nu):
    """Plane-stress Lame parameters (mu, lambda)."""
    _check_moduli(E, nu)
    return E / (2.0 * (1.0 + nu)), E * nu / (1.0 - nu * nu)


def _lame_swapped(E, nu):
    _check_moduli(E, nu)
    return E * nu / (1.0 - nu * nu), E / (1.0 + nu)


def _check_moduli(E, nu):
    if not E > 0.0:
        raise ParameterError(f"Young's modulus must be positive, got {E}")
    if not 0.0 < nu < 0.5:
        raise ParameterError(f"Poisson ratio must lie in (0, 1/2), got {nu}")


@dataclass(frozen=True)
class Material:
    """Young's modulus, Poisson ratio, plate thickness and derived moduli."""

    E: float
    nu: float
    thickness: float
    lame_variant: str = "standard"

    def __post_init__(self):
        _check_moduli(self.E, self.nu)
        if not self.thickness > 0.0:
            raise ParameterError(f"thickness must be positive, got {self.thickness}")
        if self.lame_variant not in LAME_VARIANTS:
            raise ParameterError(f"unknown lame_variant {self.lame_variant!r}")

    @property
    def mu(self):
        if self.lame_variant == "swapped":
            return _lame_swapped(self.E, self.nu)[0]
        return lame_plane_stress(self.E, self.nu)[0]

    @property
    def lam(self):
        if self.lame_variant == "swapped":
            return _lame_swapped(self.E, self.nu)[1]
        return lame_plane_stress(self.E, self.nu)[1]

    @property
    def bending_factor(self):
        """Plate bending factor E t^3 / (12 (1 - nu^2))."""
        return self.E * self.thickness**3 / (12.0 * (1.0 - self.nu * self.nu))


def membrane_stress(eps, mat):
    """Plane stress sigma = 2 mu eps + lambda tr(eps) I; eps shape (..., 2, 2)."""
    eps = np.asarray(eps, dtype=float)
    tr = eps[..., 0, 0] + eps[..., 1, 1]
    out = 2.0 * mat.mu * eps
    out[..., 0, 0] += mat.lam * tr
    out[..., 1, 1] += mat.lam * tr
    return out


def plate_stress(eps, mat):
    """Plate stress D ((1 - nu) eps + nu tr(eps) I); eps shape (..., 2, 2)."""
    eps = np.asarray(eps, dtype=float)
    D = mat.bending_factor
    tr = eps[..., 0, 0] + eps[..., 1, 1]
    out = D * (1.0 - mat.nu) * eps
    out[..., 0, 0] += D * mat.nu * tr
    out[..., 1, 1] += D * mat.nu * tr
    return out


def penalty_modulus(mat, scaling="plate"):
    """Modulus multiplying the gradient-jump penalty of the plate form.

    ``plate``    : 2 D (1 + nu), the bending-stress scale (default).
    ``membrane`` : 2 mu + 2 lambda, the literal in-plane moduli.
    """
    if scaling == "plate":
        return 2.0 * mat.bending_factor * (1.0 + mat.nu)
    if scaling == "membrane":
        return 2.0 * mat.mu + 2.0 * mat.lam
    raise ParameterError(f"unknown penalty scaling {scaling!r}")
