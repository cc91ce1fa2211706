"""Assembly of the membrane, plate (c/dG) and geometric stiffness forms.

All loops over elements and edges are vectorized over numpy arrays and run
single-threaded, so assembled operators are bit-reproducible.  Matrices come
back as scipy CSR in the full dof numbering; essential conditions are applied
afterwards with :func:`dirichlet_reduce`.

Plate form (gradient arguments theta = grad u):

    sum_T (sigma_P(grad u), eps(grad v))_T
  - sum_E (<n . sigma_P(grad u)>, [grad v])_E
  - sum_E ([grad u], <n . sigma_P(grad v)>)_E
  + pen * gamma * sum_E h_E^-1 ([grad u], [grad v])_E

The edge sums run over interior edges plus, for clamped plates, the boundary
edges (which weakly enforce a vanishing rotation; u = 0 itself is always
imposed strongly).  Jumps and averages take their sign from the fixed edge
normal stored in the mesh, and on the boundary both reduce to the trace.
"""

from __future__ import annotations

import numpy as np
import scipy.sparse as sp

from ..errors import AssemblyError, ParameterError
from .material import penalty_modulus
from .quadrature import edge_quadrature, triangle_quadrature

_PLATE_TERMS = ("cell", "consistency_prim", "consistency_adj", "penalty")
_EDGE_CHUNK = 16384


# -- shared helpers -----------------------------------------------------------


def _cell_gradients(space, pts):
    """Physical basis gradients at shared reference points: (T, q, n, 2)."""
    _, _, Jinv = space.mesh.jacobians
    g_ref = np.stack(
        [space.ref.eval(pts, (1, 0)), space.ref.eval(pts, (0, 1))], axis=-1
    )  # (q, n, 2)
    return np.einsum("qna,tad->tqnd", g_ref, Jinv)


def _cell_hessians(space, pts):
    """Physical basis Hessians at shared reference points: (T, q, n, 2, 2)."""
    _, _, Jinv = space.mesh.jacobians
    H = np.empty(pts.shape[:-1] + (space.ref.n_nodes, 2, 2))
    H[..., 0, 0] = space.ref.eval(pts, (2, 0))
    H[..., 0, 1] = space.ref.eval(pts, (1, 1))
    H[..., 1, 0] = H[..., 0, 1]
    H[..., 1, 1] = space.ref.eval(pts, (0, 2))
    return np.einsum("tad,qnab,tbe->tqnde", Jinv, H, Jinv)


def _physical_points(mesh, tris, ref_pts):
    J, _, _ = mesh.jacobians
    v0 = mesh.vertices[mesh.triangles[tris, 0]]
    return v0[:, None, :] + np.einsum("tde,qe->tqd", J[tris], ref_pts)


def _scatter(rows_dofs, cols_dofs, blocks, shape, acc):
    """Append one batch of local blocks to the COO accumulator."""
    nt, nr, nc = blocks.shape
    acc[0].append(np.repeat(rows_dofs, nc, axis=1).ravel())
    acc[1].append(np.tile(cols_dofs, (1, nr)).ravel())
    acc[2].append(blocks.ravel())


def _to_csr(acc, shape):
    rows = np.concatenate(acc[0])
    cols = np.concatenate(acc[1])
    data = np.concatenate(acc[2])
    return sp.coo_matrix((data, (rows, cols)), shape=shape).tocsr()


# -- membrane -----------------------------------------------------------------


def assemble_membrane(space, mat, load=None, clamp_tags=()):
    """Plane-stress stiffness and load: returns (K, F) in the full numbering.

    ``load`` is a callable points -> (n, 2) body force, or None for zero.
    ``clamp_tags`` names the boundary segments that will be clamped; it is
    validated here, and a nontrivial load without any clamped segment is
    rejected (the unconstrained operator is singular).
    """
    if space.n_components != 2:
        raise ParameterError("membrane assembly needs a 2-component space")
    for tag in clamp_tags:
        if tag not in space.mesh.boundary_tags:
            raise ParameterError(f"unknown boundary tag {tag!r}")

    mesh = space.mesh
    k = space.degree
    pts, w = triangle_quadrature(max(2 * (k - 1), 1))
    _, detJ, _ = mesh.jacobians
    g = _cell_gradients(space, pts)
    wdet = w[None, :] * detJ[:, None]

    gg = np.einsum("tq,tqnd,tqmd->tnm", wdet, g, g)
    cross = np.einsum("tq,tqna,tqmb->tnamb", wdet, g, g)
    mu, lam = mat.mu, mat.lam
    nloc = space.ref.n_nodes
    loc = np.zeros((mesh.n_triangles, nloc, 2, nloc, 2))
    for c in range(2):
        loc[:, :, c, :, c] += mu * gg
    loc += mu * np.transpose(cross, (0, 1, 4, 3, 2)) + lam * cross
    loc = loc.reshape(mesh.n_triangles, 2 * nloc, 2 * nloc)

    acc = ([], [], [])
    _scatter(space.cell_dofs, space.cell_dofs, loc, None, acc)
    K = _to_csr(acc, (space.n_dofs, space.n_dofs))

    F = np.zeros(space.n_dofs)
    if load is not None:
        pts_l, w_l = triangle_quadrature(2 * k)
        phys = _physical_points(mesh, np.arange(mesh.n_triangles), pts_l)
        f_vals = np.asarray(load(phys.reshape(-1, 2)), dtype=float).reshape(
            mesh.n_triangles, len(w_l), 2
        )
        vals = space.ref.eval(pts_l, (0, 0))  # (q, n)
        floc = np.einsum("tq,tqc,qn->tnc", w_l[None, :] * detJ[:, None], f_vals, vals)
        np.add.at(F, space.cell_dofs, floc.reshape(mesh.n_triangles, -1))

    if np.linalg.norm(F) > 0.0:
        fixed = space.constrained_dofs(tags=list(clamp_tags)) if clamp_tags else []
        if len(fixed) == 0:
            raise AssemblyError(
                "membrane load without any clamped boundary: system is singular"
            )
    return K, F


# -- plate (continuous/discontinuous Galerkin) --------------------------------


def _plate_stress_of_hessian(H, mat):
    """sigma_P applied to a Hessian array (..., 2, 2)."""
    D = mat.bending_factor
    tr = H[..., 0, 0] + H[..., 1, 1]
    out = D * (1.0 - mat.nu) * H
    out[..., 0, 0] += D * mat.nu * tr
    out[..., 1, 1] += D * mat.nu * tr
    return out


def _edge_side_arrays(space, mat, eids, side_tris, tau, need_flux):
    """Per-side gradient (and moment flux) of every basis function at the
    mapped edge quadrature points.  Points are parametrized from the lower-
    to the higher-indexed endpoint, so both sides see identical physical
    points."""
    mesh = space.mesh
    va = mesh.vertices[mesh.edges[eids, 0]]
    vb = mesh.vertices[mesh.edges[eids, 1]]
    phys = va[:, None, :] + tau[None, :, None] * (vb - va)[:, None, :]
    _, _, Jinv = mesh.jacobians
    Ji = Jinv[side_tris]
    v0 = mesh.vertices[mesh.triangles[side_tris, 0]]
    ref = np.einsum("ted,tqd->tqe", Ji, phys - v0[:, None, :])

    g_ref = np.stack(
        [space.ref.eval(ref, (1, 0)), space.ref.eval(ref, (0, 1))], axis=-1
    )
    grad = np.einsum("eqna,ead->eqnd", g_ref, Ji)
    flux = None
    if need_flux:
        H = np.empty(ref.shape[:2] + (space.ref.n_nodes, 2, 2))
        H[..., 0, 0] = space.ref.eval(ref, (2, 0))
        H[..., 0, 1] = space.ref.eval(ref, (1, 1))
        H[..., 1, 0] = H[..., 0, 1]
        H[..., 1, 1] = space.ref.eval(ref, (0, 2))
        Hp = np.einsum("ead,eqnab,ebf->eqndf", Ji, H, Ji)
        sig = _plate_stress_of_hessian(Hp, mat)
        flux = np.einsum("ec,eqncd->eqnd", mesh.edge_normal[eids], sig)
    return grad, flux


def assemble_plate_cdg(
    space,
    mat,
    gamma,
    bc_kind,
    penalty_scaling="plate",
    terms=_PLATE_TERMS,
):
    """c/dG bending stiffness, full numbering (u = 0 applied separately).

    ``terms`` selects individual contributions, mainly for verification:
    the cell integrals, the two consistency edge terms (trial-flux and
    test-flux), and the gradient-jump penalty.
    """
    if space.n_components != 1:
        raise ParameterError("plate assembly needs a scalar space")
    if space.degree < 2:
        raise ParameterError("plate bending needs degree >= 2")
    if not gamma > 0.0:
        raise ParameterError(f"penalty parameter gamma must be positive, got {gamma}")
    if bc_kind not in ("clamped", "simply_supported"):
        raise ParameterError(f"unknown plate bc kind {bc_kind!r}")
    unknown = set(terms) - set(_PLATE_TERMS)
    if unknown:
        raise ParameterError(f"unknown plate terms {sorted(unknown)}")

    mesh = space.mesh
    k = space.degree
    acc = ([], [], [])

    if "cell" in terms:
        pts, w = triangle_quadrature(max(2 * (k - 2) + 2, 1))
        _, detJ, _ = mesh.jacobians
        H = _cell_hessians(space, pts)
        sig = _plate_stress_of_hessian(H, mat)
        wdet = w[None, :] * detJ[:, None]
        loc = np.einsum("tq,tqnab,tqmab->tnm", wdet, sig, H)
        _scatter(space.cell_dofs, space.cell_dofs, loc, None, acc)

    edge_terms = [t for t in terms if t != "cell"]
    if edge_terms:
        pen = penalty_modulus(mat, penalty_scaling) * gamma
        tau, wq = edge_quadrature(2 * k)
        need_flux = "consistency_prim" in terms or "consistency_adj" in terms

        def do_edges(eids, interior):
            if len(eids) == 0:
                return
            for lo in range(0, len(eids), _EDGE_CHUNK):
                chunk = eids[lo : lo + _EDGE_CHUNK]
                _assemble_edge_chunk(
                    space, mat, chunk, interior, tau, wq, pen, terms, need_flux, acc
                )

        do_edges(mesh.interior_edges, True)
        if bc_kind == "clamped":
            do_edges(mesh.boundary_edges, False)

    return _to_csr(acc, (space.n_dofs, space.n_dofs))


def _assemble_edge_chunk(space, mat, eids, interior, tau, wq, pen, terms, need_flux, acc):
    mesh = space.mesh
    scale = wq[None, :] * mesh.edge_length[eids][:, None]  # (E, q)
    pen_edge = pen / mesh.h_E[eids]

    sides = []
    if interior:
        side_tris = [mesh.edge_tris[eids, 0], mesh.edge_tris[eids, 1]]
        signs = (1.0, -1.0)  # jump [v] = v(+) - v(-), normal points + -> -
        avg = 0.5
    else:
        side_tris = [mesh.edge_tris[eids, 0]]
        signs = (1.0,)
        avg = 1.0
    for st in side_tris:
        sides.append(_edge_side_arrays(space, mat, eids, st, tau, need_flux))

    for su, (grad_u, flux_u) in enumerate(sides):
        dofs_u = space.cell_dofs[side_tris[su]]
        for sv, (grad_v, flux_v) in enumerate(sides):
            dofs_v = space.cell_dofs[side_tris[sv]]
            block = 0.0
            if "consistency_prim" in terms:
                block = block - avg * signs[sv] * np.einsum(
                    "eq,eqnd,eqmd->enm", scale, flux_u, grad_v
                )
            if "consistency_adj" in terms:
                block = block - signs[su] * avg * np.einsum(
                    "eq,eqnd,eqmd->enm", scale, grad_u, flux_v
                )
            if "penalty" in terms:
                block = block + signs[su] * signs[sv] * np.einsum(
                    "e,eq,eqnd,eqmd->enm", pen_edge, scale, grad_u, grad_v
                )
            if isinstance(block, float):
                continue
            _scatter(dofs_u, dofs_v, block, None, acc)


# -- geometric stiffness ------------------------------------------------------


def assemble_geometric(space, stress, thickness):
    """G_ij = t * integral (Sigma grad phi_j) . grad phi_i, full numbering."""
    if space.n_components != 1:
        raise ParameterError("geometric stiffness needs a scalar space")
    mesh = space.mesh
    k = space.degree
    order = max(2 * (k - 1) + int(stress.degree), 1)
    pts, w = triangle_quadrature(order)
    _, detJ, _ = mesh.jacobians
    g = _cell_gradients(space, pts)
    S = stress.evaluate(np.arange(mesh.n_triangles), pts)
    wdet = w[None, :] * detJ[:, None]
    loc = thickness * np.einsum("tq,tqna,tqab,tqmb->tnm", wdet, g, S, g)
    acc = ([], [], [])
    _scatter(space.cell_dofs, space.cell_dofs, loc, None, acc)
    return _to_csr(acc, (space.n_dofs, space.n_dofs))


# -- auxiliary operators ------------------------------------------------------


def mass_matrix(space):
    """L2 mass matrix (block diagonal over components)."""
    mesh = space.mesh
    pts, w = triangle_quadrature(2 * space.degree)
    _, detJ, _ = mesh.jacobians
    vals = space.ref.eval(pts, (0, 0))
    loc = np.einsum("tq,qn,qm->tnm", w[None, :] * detJ[:, None], vals, vals)
    nloc = space.ref.n_nodes
    if space.n_components == 2:
        big = np.zeros((mesh.n_triangles, nloc, 2, nloc, 2))
        for c in range(2):
            big[:, :, c, :, c] = loc
        loc = big.reshape(mesh.n_triangles, 2 * nloc, 2 * nloc)
    acc = ([], [], [])
    _scatter(space.cell_dofs, space.cell_dofs, loc, None, acc)
    return _to_csr(acc, (space.n_dofs, space.n_dofs))


def laplace_matrix(space):
    """Scalar gradient stiffness integral grad phi_i . grad phi_j."""
    if space.n_components != 1:
        raise ParameterError("laplace_matrix expects a scalar space")
    mesh = space.mesh
    pts, w = triangle_quadrature(max(2 * (space.degree - 1), 1))
    _, detJ, _ = mesh.jacobians
    g = _cell_gradients(space, pts)
    loc = np.einsum("tq,tqnd,tqmd->tnm", w[None, :] * detJ[:, None], g, g)
    acc = ([], [], [])
    _scatter(space.cell_dofs, space.cell_dofs, loc, None, acc)
    return _to_csr(acc, (space.n_dofs, space.n_dofs))


def assemble_stress_load(space, weight_eval, order):
    """Right side b[(n,c)] = integral eps(phi_{n,c}) : W for a 2x2 field W.

    ``weight_eval(tris, ref_pts)`` returns the symmetric weight tensor at the
    quadrature points, shape (ntri, q, 2, 2).
    """
    if space.n_components != 2:
        raise ParameterError("stress load needs a 2-component space")
    mesh = space.mesh
    pts, w = triangle_quadrature(order)
    _, detJ, _ = mesh.jacobians
    g = _cell_gradients(space, pts)
    W = weight_eval(np.arange(mesh.n_triangles), pts)
    # eps(phi_{n,c}) : W = sum_d grad(phi_n)_d W_{c,d} for symmetric W
    floc = np.einsum("tq,tqnd,tqcd->tnc", w[None, :] * detJ[:, None], g, W)
    F = np.zeros(space.n_dofs)
    np.add.at(F, space.cell_dofs, floc.reshape(mesh.n_triangles, -1))
    return F


# -- essential boundary conditions -------------------------------------------


def dirichlet_reduce(A, fixed, b=None, values=None):
    """Eliminate constrained dofs: returns (A_ff, b_f, free).

    ``values`` lifts nonzero constrained data into the right side; the
    default is the homogeneous case.
    """
    n = A.shape[0]
    fixed = np.asarray(fixed, dtype=np.int64)
    free = np.setdiff1d(np.arange(n), fixed)
    A = A.tocsr()
    A_ff = A[free][:, free]
    b_f = None
    if b is not None:
        b_f = np.asarray(b, dtype=float)[free].copy()
        if values is not None and len(fixed):
            b_f -= A[free][:, fixed] @ np.asarray(values, dtype=float)
    return A_ff, b_f, free


def expand_reduced(x_free, n, free, fixed=None, values=None):
    """Scatter a reduced solution back into the full numbering."""
    x = np.zeros(n)
    x[free] = x_free
    if fixed is not None and values is not None:
        x[np.asarray(fixed, dtype=np.int64)] = values
    return x
