"""Conforming triangle meshes with oriented edges and newest-vertex bisection.

Conventions:

* Triangle vertices are stored counterclockwise.
* Every edge carries a fixed unit normal.  For boundary edges it is the
  exterior normal; for interior edges it points out of the adjacent triangle
  with the lower index (the ``plus`` side) into the one with the higher index
  (the ``minus`` side).  All jump/average bookkeeping downstream derives its
  signs from the stored normal, so assembled quantities do not depend on
  triangle numbering.
* The edge length scale is ``h_E = (|T+| + |T-|) / (2 |E|)``; boundary edges
  use the single adjacent triangle area.
* Refinement is newest-vertex bisection with conforming closure.  Each
  triangle remembers which local vertex is its peak (newest vertex); the
  refinement edge is the edge opposite the peak.  The ``build_*`` helpers
  produce right-isosceles triangles whose peak is the right-angle corner, so
  every descendant is right-isosceles as well (minimum angle stays at 45
  degrees).

``Mesh`` objects are immutable; ``bisect`` returns a new mesh together with a
parent map.
"""

from __future__ import annotations

import numpy as np

from .errors import ParameterError

__all__ = [
    "Mesh",
    "build_unit_square",
    "build_lshape",
    "bisect",
    "classify_edges",
    "compute_h_E",
    "write_mesh_text",
    "read_mesh_text",
]

_UNTAGGED = "boundary"


class Mesh:
    """Geometrically conforming triangulation with full edge bookkeeping.

    Parameters
    ----------
    vertices : (V, 2) float array
    triangles : (T, 3) int array, counterclockwise
    peak : (T,) int array or None
        Local index of the newest vertex per triangle.  Defaults to the
        vertex opposite the longest edge.
    boundary_tags : dict mapping a sorted vertex pair to a tag name
        Boundary edges missing from the map get the tag ``"boundary"``.
    """

    def __init__(self, vertices, triangles, peak=None, boundary_tags=None):
        vertices = np.ascontiguousarray(vertices, dtype=float)
        triangles = np.ascontiguousarray(triangles, dtype=np.int64)
        if vertices.ndim != 2 or vertices.shape[1] != 2:
            raise ParameterError("vertices must be an (n, 2) array")
        if triangles.ndim != 2 or triangles.shape[1] != 3:
            raise ParameterError("triangles must be an (m, 3) array")
        self.vertices = vertices
        self.triangles = triangles
        nt = len(triangles)

        a = vertices[triangles[:, 0]]
        b = vertices[triangles[:, 1]]
        c = vertices[triangles[:, 2]]
        det = (b[:, 0] - a[:, 0]) * (c[:, 1] - a[:, 1]) - (b[:, 1] - a[:, 1]) * (
            c[:, 0] - a[:, 0]
        )
        if np.any(det <= 0.0):
            raise ParameterError("triangles must be counterclockwise with positive area")
        self.tri_area = 0.5 * det

        # Edge table.  Local edge i of a triangle is the edge opposite local
        # vertex i, traversed (i+1) -> (i+2) in the counterclockwise cycle.
        t_of = np.tile(np.arange(nt), 3)
        i_loc = np.repeat(np.arange(3), nt)
        p = triangles[t_of, (i_loc + 1) % 3]
        q = triangles[t_of, (i_loc + 2) % 3]
        key = np.sort(np.column_stack([p, q]), axis=1)
        edges, inverse = np.unique(key, axis=0, return_inverse=True)
        inverse = inverse.reshape(-1)
        ne = len(edges)
        counts = np.bincount(inverse, minlength=ne)
        if counts.max(initial=0) > 2:
            raise ParameterError("non-manifold mesh: an edge is shared by >2 triangles")

        order = np.lexsort((t_of, inverse))
        starts = np.searchsorted(inverse[order], np.arange(ne))
        plus_slot = order[starts]
        plus_tri = t_of[plus_slot]
        minus_tri = np.full(ne, -1, dtype=np.int64)
        two = counts == 2
        minus_tri[two] = t_of[order[starts[two] + 1]]

        self.edges = edges
        self.edge_tris = np.column_stack([plus_tri, minus_tri])
        self.tri_edges = np.empty((nt, 3), dtype=np.int64)
        self.tri_edges[t_of, i_loc] = inverse

        # Exterior unit normal of the plus triangle: rotate the directed edge
        # (CCW traversal inside plus) by -90 degrees.
        d = vertices[q[plus_slot]] - vertices[p[plus_slot]]
        length = np.hypot(d[:, 0], d[:, 1])
        self.edge_length = length
        self.edge_normal = np.column_stack([d[:, 1], -d[:, 0]]) / length[:, None]

        area_sum = self.tri_area[plus_tri].copy()
        area_sum[two] += self.tri_area[minus_tri[two]]
        self.h_E = area_sum / (2.0 * length)

        self.tri_diameter = self.edge_length[self.tri_edges].max(axis=1)

        if peak is None:
            local_len = self.edge_length[self.tri_edges]
            peak = np.argmax(local_len, axis=1).astype(np.int64)
        else:
            peak = np.ascontiguousarray(peak, dtype=np.int64)
            if peak.shape != (nt,) or np.any((peak < 0) | (peak > 2)):
                raise ParameterError("peak must hold one local index per triangle")
        self.peak = peak

        # Boundary tags.
        tags = [None] * ne
        boundary = np.flatnonzero(~two)
        if boundary_tags:
            lookup = {(int(min(k)), int(max(k))): v for k, v in boundary_tags.items()}
            for e in boundary:
                tags[e] = lookup.pop((int(edges[e, 0]), int(edges[e, 1])), _UNTAGGED)
            if lookup:
                raise ParameterError(
                    f"boundary tags refer to non-boundary edges: {sorted(lookup)[:4]}"
                )
        else:
            for e in boundary:
                tags[e] = _UNTAGGED
        self.edge_tag = tags
        self.boundary_tags = {}
        for e in boundary:
            self.boundary_tags.setdefault(tags[e], []).append(e)
        self.boundary_tags = {
            k: np.asarray(v, dtype=np.int64) for k, v in self.boundary_tags.items()
        }

        self._geom = None
        for arr in (
            self.vertices,
            self.triangles,
            self.peak,
            self.edges,
            self.edge_tris,
            self.tri_edges,
            self.edge_normal,
            self.edge_length,
            self.h_E,
            self.tri_area,
            self.tri_diameter,
        ):
            arr.setflags(write=False)

    # -- basic queries ----------------------------------------------------

    @property
    def n_vertices(self):
        return len(self.vertices)

    @property
    def n_triangles(self):
        return len(self.triangles)

    @property
    def n_edges(self):
        return len(self.edges)

    @property
    def interior_edges(self):
        return np.flatnonzero(self.edge_tris[:, 1] >= 0)

    @property
    def boundary_edges(self):
        return np.flatnonzero(self.edge_tris[:, 1] < 0)

    @property
    def jacobians(self):
        """Affine maps x = v0 + J xi: returns (J, detJ, Jinv)."""
        if self._geom is None:
            v0 = self.vertices[self.triangles[:, 0]]
            v1 = self.vertices[self.triangles[:, 1]]
            v2 = self.vertices[self.triangles[:, 2]]
            J = np.empty((self.n_triangles, 2, 2))
            J[:, :, 0] = v1 - v0
            J[:, :, 1] = v2 - v0
            det = J[:, 0, 0] * J[:, 1, 1] - J[:, 0, 1] * J[:, 1, 0]
            Jinv = np.empty_like(J)
            Jinv[:, 0, 0] = J[:, 1, 1] / det
            Jinv[:, 0, 1] = -J[:, 0, 1] / det
            Jinv[:, 1, 0] = -J[:, 1, 0] / det
            Jinv[:, 1, 1] = J[:, 0, 0] / det
            self._geom = (J, det, Jinv)
        return self._geom

    @property
    def neighbors(self):
        """(T, 3) triangle index across local edge i, -1 at the boundary."""
        et = self.edge_tris[self.tri_edges]
        own = np.arange(self.n_triangles)[:, None]
        return np.where(et[:, :, 0] == own, et[:, :, 1], et[:, :, 0])

    def refinement_edges(self):
        return self.tri_edges[np.arange(self.n_triangles), self.peak]

    def min_angle(self):
        """Smallest corner angle over all triangles (radians)."""
        v = self.vertices[self.triangles]
        angles = []
        for i in range(3):
            e1 = v[:, (i + 1) % 3] - v[:, i]
            e2 = v[:, (i + 2) % 3] - v[:, i]
            cosang = np.einsum("td,td->t", e1, e2) / (
                np.hypot(e1[:, 0], e1[:, 1]) * np.hypot(e2[:, 0], e2[:, 1])
            )
            angles.append(np.arccos(np.clip(cosang, -1.0, 1.0)))
        return float(np.min(angles))

    def shape_regularity(self):
        """Max ratio of circumscribed to inscribed circle diameter."""
        v = self.vertices[self.triangles]
        la = np.linalg.norm(v[:, 1] - v[:, 2], axis=1)
        lb = np.linalg.norm(v[:, 2] - v[:, 0], axis=1)
        lc = np.linalg.norm(v[:, 0] - v[:, 1], axis=1)
        s = 0.5 * (la + lb + lc)
        r_in = self.tri_area / s
        r_circ = la * lb * lc / (4.0 * self.tri_area)
        return float(np.max(r_circ / r_in))

    def centroids(self):
        return self.vertices[self.triangles].mean(axis=1)


# -- builders ---------------------------------------------------------------


def _grid_cell_triangles(v00, v10, v01, v11, slash):
    """Split one grid cell into two right-isosceles triangles.

    ``slash`` picks the diagonal v00-v11, otherwise v10-v01.  The peak is the
    right-angle corner so the refinement edge is the hypotenuse.
    """
    if slash:
        return [((v00, v10, v11), 1), ((v00, v11, v01), 2)]
    return [((v00, v10, v01), 0), ((v10, v11, v01), 1)]


def build_unit_square(n):
    """Structured n-by-n triangulation of the unit square."""
    if n < 1:
        raise ParameterError("n must be >= 1")
    idx = lambda i, j: j * (n + 1) + i
    xs = np.arange(n + 1) / n
    vertices = np.column_stack(
        [np.tile(xs, n + 1), np.repeat(xs, n + 1)]
    )
    tris, peaks = [], []
    for cj in range(n):
        for ci in range(n):
            cell = _grid_cell_triangles(
                idx(ci, cj), idx(ci + 1, cj), idx(ci, cj + 1), idx(ci + 1, cj + 1), True
            )
            for tri, pk in cell:
                tris.append(tri)
                peaks.append(pk)
    mesh = Mesh(vertices, np.array(tris), np.array(peaks))
    tags = _tag_square_boundary(mesh)
    return Mesh(vertices, np.array(tris), np.array(peaks), tags)


def _tag_square_boundary(mesh, tol=1e-12):
    tags = {}
    for e in mesh.boundary_edges:
        a, b = mesh.edges[e]
        mid = 0.5 * (mesh.vertices[a] + mesh.vertices[b])
        if abs(mid[1]) < tol:
            name = "bottom"
        elif abs(mid[0] - 1.0) < tol:
            name = "right"
        elif abs(mid[1] - 1.0) < tol:
            name = "top"
        elif abs(mid[0]) < tol:
            name = "left"
        else:
            raise ParameterError("square boundary edge off the unit square outline")
        tags[(int(a), int(b))] = name
    return tags


def build_lshape(n):
    """Structured triangulation of (0,1)^2 minus the quadrant (1/2,1)x(0,1/2).

    ``n`` subdivisions per half-edge, i.e. each of the three square blocks is
    an n-by-n grid.  The cell diagonals point away from the reentrant corner
    at (1/2, 1/2), which keeps the corner treatment symmetric across the
    three blocks.
    """
    if n < 1:
        raise ParameterError("n must be >= 1")
    m = 2 * n
    ids = {}
    coords = []
    for j in range(m + 1):
        for i in range(m + 1):
            if i > n and j < n:
                continue
            ids[(i, j)] = len(coords)
            coords.append((i / m, j / m))
    vertices = np.array(coords)

    tris, peaks = [], []
    for cj in range(m):
        for ci in range(m):
            if ci >= n and cj < n:
                continue
            v00 = ids[(ci, cj)]
            v10 = ids[(ci + 1, cj)]
            v01 = ids[(ci, cj + 1)]
            v11 = ids[(ci + 1, cj + 1)]
            # upper-left block uses the backslash diagonal
            slash = not (ci < n and cj >= n)
            for tri, pk in _grid_cell_triangles(v00, v10, v01, v11, slash):
                tris.append(tri)
                peaks.append(pk)
    mesh = Mesh(vertices, np.array(tris), np.array(peaks))
    tags = _tag_lshape_boundary(mesh)
    return Mesh(vertices, np.array(tris), np.array(peaks), tags)


def _tag_lshape_boundary(mesh, tol=1e-12):
    tags = {}
    for e in mesh.boundary_edges:
        a, b = mesh.edges[e]
        mid = 0.5 * (mesh.vertices[a] + mesh.vertices[b])
        x, y = mid
        if abs(x) < tol:
            name = "left"
        elif abs(y - 1.0) < tol:
            name = "top"
        elif abs(x - 1.0) < tol:
            name = "right"
        elif abs(y) < tol:
            name = "bottom"
        elif abs(x - 0.5) < tol and y < 0.5:
            name = "reentrant_x"
        elif abs(y - 0.5) < tol and x > 0.5:
            name = "reentrant_y"
        else:
            raise ParameterError("L-shape boundary edge off the domain outline")
        tags[(int(a), int(b))] = name
    return tags


LSHAPE_CORNER = np.array([0.5, 0.5])

GEOMETRY_TAGS = {
    "square": ("bottom", "right", "top", "left"),
    "lshape": ("bottom", "right", "top", "left", "reentrant_x", "reentrant_y"),
}


# -- refinement ---------------------------------------------------------------


def bisect(mesh, marked):
    """Newest-vertex bisection of ``marked`` triangles plus conforming closure.

    Returns ``(refined, parent_of)`` where ``parent_of[j]`` is the index of the
    input triangle containing output triangle ``j``.  An empty marking returns
    the input mesh itself (meshes are immutable, sharing is safe).
    """
    marked = np.asarray(sorted({int(t) for t in marked}), dtype=np.int64)
    if marked.size == 0:
        return mesh, np.arange(mesh.n_triangles, dtype=np.int64)
    if marked.min() < 0 or marked.max() >= mesh.n_triangles:
        raise ParameterError("marked set contains invalid triangle indices")

    tri = mesh.triangles
    ref_edge = mesh.refinement_edges()
    edge_marked = np.zeros(mesh.n_edges, dtype=bool)
    edge_marked[ref_edge[marked]] = True
    # Closure: a triangle touching any marked edge must split its own
    # refinement edge too; iterate to the fixed point.
    while True:
        touches = edge_marked[mesh.tri_edges].any(axis=1)
        want = np.zeros_like(edge_marked)
        want[ref_edge[touches]] = True
        if not (want & ~edge_marked).any():
            break
        edge_marked |= want

    split = np.flatnonzero(edge_marked)
    mid_id = np.full(mesh.n_edges, -1, dtype=np.int64)
    mid_id[split] = mesh.n_vertices + np.arange(split.size)
    mids = 0.5 * (mesh.vertices[mesh.edges[split, 0]] + mesh.vertices[mesh.edges[split, 1]])
    new_vertices = np.vstack([mesh.vertices, mids])

    new_tris, new_peak, parent = [], [], []

    def emit(t0, t1, t2, pk, par):
        new_tris.append((t0, t1, t2))
        new_peak.append(pk)
        parent.append(par)

    for t in range(mesh.n_triangles):
        e_r = ref_edge[t]
        if not edge_marked[e_r]:
            emit(*tri[t], mesh.peak[t], t)
            continue
        k = mesh.peak[t]
        P = tri[t, k]
        A = tri[t, (k + 1) % 3]
        B = tri[t, (k + 2) % 3]
        m = mid_id[e_r]
        e_a = mesh.tri_edges[t, (k + 2) % 3]  # parent edge (P, A)
        e_b = mesh.tri_edges[t, (k + 1) % 3]  # parent edge (B, P)
        # Child (P, A, m) has peak m and refinement edge (P, A); split again
        # right away when that parent edge is marked (and likewise below).
        if edge_marked[e_a]:
            m2 = mid_id[e_a]
            emit(m, P, m2, 2, t)
            emit(m, m2, A, 1, t)
        else:
            emit(P, A, m, 2, t)
        if edge_marked[e_b]:
            m3 = mid_id[e_b]
            emit(m, B, m3, 2, t)
            emit(m, m3, P, 1, t)
        else:
            emit(P, m, B, 1, t)

    tag_map = {}
    for name, eids in mesh.boundary_tags.items():
        for e in eids:
            a, b = (int(v) for v in mesh.edges[e])
            if edge_marked[e]:
                mm = int(mid_id[e])
                tag_map[(min(a, mm), max(a, mm))] = name
                tag_map[(min(mm, b), max(mm, b))] = name
            else:
                tag_map[(a, b)] = name

    refined = Mesh(new_vertices, np.array(new_tris), np.array(new_peak), tag_map)
    return refined, np.array(parent, dtype=np.int64)


# -- per-edge helpers ---------------------------------------------------------


def classify_edges(mesh):
    """Disjoint split of the edge set into (interior, boundary) index arrays."""
    return mesh.interior_edges, mesh.boundary_edges


def compute_h_E(mesh, edge):
    """Recompute the length scale (|T+| + |T-|) / (2 |E|) for one edge."""
    plus, minus = mesh.edge_tris[edge]
    area = mesh.tri_area[plus]
    if minus >= 0:
        area = area + mesh.tri_area[minus]
    return float(area / (2.0 * mesh.edge_length[edge]))


# -- plain-text serialization -------------------------------------------------


def write_mesh_text(mesh, path):
    """Write the plain-text mesh format (VERTICES / TRIANGLES / BOUNDARY)."""
    lines = [f"VERTICES {mesh.n_vertices}"]
    for x, y in mesh.vertices:
        lines.append(f"{x:.17g} {y:.17g}")
    lines.append(f"TRIANGLES {mesh.n_triangles}")
    for i, j, k in mesh.triangles:
        lines.append(f"{i} {j} {k}")
    boundary = mesh.boundary_edges
    lines.append(f"BOUNDARY {len(boundary)}")
    for e in boundary:
        a, b = mesh.edges[e]
        lines.append(f"{a} {b} {mesh.edge_tag[e]}")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def read_mesh_text(path):
    """Read the plain-text mesh format written by :func:`write_mesh_text`.

    Peaks are not stored in the format; the loaded mesh falls back to
    longest-edge peaks (identical for the right-isosceles families produced
    by the builders).
    """
    with open(path, "r", encoding="utf-8") as fh:
        tokens = fh.read().split("\n")
    pos = 0

    def expect(word):
        nonlocal pos
        head = tokens[pos].split()
        if len(head) != 2 or head[0] != word:
            raise ParameterError(f"malformed mesh file near line {pos + 1}")
        pos += 1
        return int(head[1])

    nv = expect("VERTICES")
    vertices = np.array([[float(v) for v in tokens[pos + i].split()] for i in range(nv)])
    pos += nv
    nt = expect("TRIANGLES")
    triangles = np.array(
        [[int(v) for v in tokens[pos + i].split()] for i in range(nt)], dtype=np.int64
    )
    pos += nt
    nb = expect("BOUNDARY")
    tags = {}
    for i in range(nb):
        a, b, name = tokens[pos + i].split()
        tags[(int(a), int(b))] = name
    return Mesh(vertices, triangles, None, tags)
