"""Continuous Lagrange P_k spaces on triangle meshes.

Global scalar numbering: vertex nodes first, then (k-1) nodes per mesh edge
(enumerated from the lower- to the higher-indexed endpoint), then the
interior nodes of each triangle.  Shared mesh entities therefore map to
identical global nodes, which gives exact C0 continuity.  Vector-valued
spaces interleave components: dof = n_components * node + component.
"""

from __future__ import annotations

from math import comb

import numpy as np

from ..errors import ParameterError
from .reference import reference_triangle


class FeSpace:
    """Degree-k Lagrange space over a mesh; immutable after construction."""

    def __init__(self, mesh, degree, n_components=1):
        if degree < 1:
            raise ParameterError(f"polynomial degree must be >= 1, got {degree}")
        if n_components not in (1, 2):
            raise ParameterError("only scalar and 2-vector spaces are supported")
        self.mesh = mesh
        self.degree = k = degree
        self.n_components = n_components
        self.ref = reference_triangle(degree)

        nv, ne, nt = mesh.n_vertices, mesh.n_edges, mesh.n_triangles
        per_edge = k - 1
        n_int = (k - 1) * (k - 2) // 2
        self.n_scalar = nv + ne * per_edge + nt * n_int
        self.n_dofs = self.n_scalar * n_components

        scal = np.empty((nt, self.ref.n_nodes), dtype=np.int64)
        scal[:, 0:3] = mesh.triangles
        col = 3
        for i in range(3):
            if per_edge == 0:
                break
            ge = mesh.tri_edges[:, i]
            a = mesh.triangles[:, (i + 1) % 3]
            b = mesh.triangles[:, (i + 2) % 3]
            s = np.arange(per_edge)
            # local edge nodes run a -> b; global slots run min -> max
            slots = np.where((a < b)[:, None], s, per_edge - 1 - s)
            scal[:, col : col + per_edge] = nv + ge[:, None] * per_edge + slots
            col += per_edge
        if n_int:
            base = nv + ne * per_edge
            scal[:, col:] = base + np.arange(nt)[:, None] * n_int + np.arange(n_int)
        self.cell_scalar = scal
        if n_components == 1:
            self.cell_dofs = scal
        else:
            self.cell_dofs = (
                n_components * scal[:, :, None] + np.arange(n_components)
            ).reshape(nt, -1)

        coords = np.empty((self.n_scalar, 2))
        coords[:nv] = mesh.vertices
        if per_edge:
            va = mesh.vertices[mesh.edges[:, 0]]
            vb = mesh.vertices[mesh.edges[:, 1]]
            fr = (np.arange(per_edge) + 1.0) / k
            coords[nv : nv + ne * per_edge] = (
                va[:, None, :] + fr[None, :, None] * (vb - va)[:, None, :]
            ).reshape(-1, 2)
        if n_int:
            J, _, _ = mesh.jacobians
            bary = self.ref.nodes[self.ref.interior_nodes]
            v0 = mesh.vertices[mesh.triangles[:, 0]]
            phys = v0[:, None, :] + np.einsum("tde,ne->tnd", J, bary)
            coords[nv + ne * per_edge :] = phys.reshape(-1, 2)
        self.node_coords = coords

        self.boundary_nodes = {}
        for tag, eids in mesh.boundary_tags.items():
            parts = [mesh.edges[eids].ravel()]
            if per_edge:
                parts.append(
                    (nv + eids[:, None] * per_edge + np.arange(per_edge)).ravel()
                )
            self.boundary_nodes[tag] = np.unique(np.concatenate(parts))

        for arr in (self.cell_scalar, self.cell_dofs, self.node_coords):
            arr.setflags(write=False)

    def constrained_dofs(self, tags=None, components=None):
        """Global dofs on the given boundary tags (default: all tags/components)."""
        if tags is None:
            tags = sorted(self.boundary_nodes)
        else:
            for tag in tags:
                if tag not in self.boundary_nodes:
                    raise ParameterError(f"unknown boundary tag {tag!r}")
        if not tags:
            return np.empty(0, dtype=np.int64)
        nodes = np.unique(np.concatenate([self.boundary_nodes[t] for t in tags]))
        if self.n_components == 1:
            return nodes
        if components is None:
            components = range(self.n_components)
        dofs = np.concatenate(
            [self.n_components * nodes + c for c in components]
        )
        return np.unique(dofs)


def build_space(mesh, degree, n_components=1):
    """Lagrange space; degree >= 2 is required for plate (bending) use."""
    return FeSpace(mesh, degree, n_components)


def expected_dof_count(mesh, degree):
    """V + (k-1) E + (k-1)(k-2)/2 F, the P_k scalar dof count."""
    return (
        mesh.n_vertices
        + (degree - 1) * mesh.n_edges
        + (degree - 1) * (degree - 2) // 2 * mesh.n_triangles
    )


def interpolate(space, f):
    """Nodal interpolation of a callable f(points) into the space."""
    vals = np.asarray(f(space.node_coords), dtype=float)
    if space.n_components == 1:
        if vals.shape != (space.n_scalar,):
            raise ParameterError("interpolant callable must return one value per node")
        return vals.copy()
    if vals.shape != (space.n_scalar, space.n_components):
        raise ParameterError("interpolant callable must return (n, 2) values")
    return vals.reshape(-1).copy()


def _coefficients(space, U, tris):
    """Per-element coefficient array (ntri, n_nodes, n_components)."""
    U = np.asarray(U, dtype=float)
    if U.shape != (space.n_dofs,):
        raise ParameterError("coefficient vector does not match the space")
    return U[space.cell_dofs[tris]].reshape(
        len(tris), space.ref.n_nodes, space.n_components
    )


def evaluate_deriv(space, U, tris, ref_pts, deriv=(0, 0)):
    """Physical derivative D^deriv of the FE function on selected triangles.

    ``ref_pts`` is (npts, 2), shared across triangles, or (ntri, npts, 2).
    Returns (ntri, npts) for scalar spaces and (ntri, npts, 2) for vector
    spaces.  Affine chain rule: each physical derivative is a binomial
    combination of reference derivatives weighted by products of inverse
    Jacobian entries.
    """
    tris = np.asarray(tris, dtype=np.int64)
    coefs = _coefficients(space, U, tris)
    _, _, Jinv = space.mesh.jacobians
    Ji = Jinv[tris]
    a, b = deriv
    shared = np.asarray(ref_pts).ndim == 2

    out = None
    for i in range(a + 1):
        for j in range(b + 1):
            w = (
                comb(a, i)
                * comb(b, j)
                * Ji[:, 0, 0] ** i
                * Ji[:, 1, 0] ** (a - i)
                * Ji[:, 0, 1] ** j
                * Ji[:, 1, 1] ** (b - j)
            )
            ref_vals = space.ref.eval(ref_pts, (i + j, (a - i) + (b - j)))
            if shared:
                term = np.einsum("tnc,pn->tpc", coefs, ref_vals)
            else:
                term = np.einsum("tnc,tpn->tpc", coefs, ref_vals)
            out = term * w[:, None, None] if out is None else out + term * w[:, None, None]
    if space.n_components == 1:
        return out[..., 0]
    return out


def transfer(space_from, U_from, space_to, parent_of=None):
    """Exact re-representation on a space that refines ``space_from``.

    Works for a higher degree on the same mesh, or for any degree on a
    bisection-refined mesh (``parent_of`` maps new triangles to ancestors).
    The function must be piecewise polynomial of degree <= the target degree
    on every target element for the transfer to be exact.
    """
    mesh_to = space_to.mesh
    if parent_of is None:
        if mesh_to is not space_from.mesh:
            raise ParameterError("parent_of is required when meshes differ")
        parent_of = np.arange(mesh_to.n_triangles, dtype=np.int64)
    if space_to.n_components != space_from.n_components:
        raise ParameterError("component counts must match")

    J_to, _, _ = mesh_to.jacobians
    v0_to = mesh_to.vertices[mesh_to.triangles[:, 0]]
    phys = v0_to[:, None, :] + np.einsum("tde,ne->tnd", J_to, space_to.ref.nodes)

    anc = parent_of
    _, _, Jinv_from = space_from.mesh.jacobians
    v0_from = space_from.mesh.vertices[space_from.mesh.triangles[anc, 0]]
    ref_in_from = np.einsum("ted,tnd->tne", Jinv_from[anc], phys - v0_from[:, None, :])

    vals = evaluate_deriv(
        space_from, U_from, anc, ref_in_from, (0, 0)
    )  # (T_to, n_nodes[, 2])
    U_to = np.zeros(space_to.n_dofs)
    if space_to.n_components == 1:
        U_to[space_to.cell_dofs] = vals
    else:
        U_to[space_to.cell_dofs] = vals.reshape(len(anc), -1)
    return U_to
