"""Finite element core: reference elements, quadrature, materials, spaces,
stress fields and the assembly of the membrane, plate and geometric forms."""

from .material import Material, lame_plane_stress, membrane_stress, plate_stress
from .quadrature import edge_quadrature, triangle_quadrature
from .reference import ReferenceTriangle
from .space import FeSpace, build_space, evaluate_deriv, interpolate, transfer
from .stress import FeStress, PrescribedStress, stress_from_displacement
from .assemble import (
    assemble_geometric,
    assemble_membrane,
    assemble_plate_cdg,
    assemble_stress_load,
    dirichlet_reduce,
    expand_reduced,
    laplace_matrix,
    mass_matrix,
)

__all__ = [
    "Material",
    "lame_plane_stress",
    "membrane_stress",
    "plate_stress",
    "triangle_quadrature",
    "edge_quadrature",
    "ReferenceTriangle",
    "FeSpace",
    "build_space",
    "interpolate",
    "transfer",
    "evaluate_deriv",
    "PrescribedStress",
    "FeStress",
    "stress_from_displacement",
    "assemble_membrane",
    "assemble_plate_cdg",
    "assemble_geometric",
    "assemble_stress_load",
    "mass_matrix",
    "laplace_matrix",
    "dirichlet_reduce",
    "expand_reduced",
]
