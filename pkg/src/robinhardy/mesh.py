"""Graded interval meshes, triangulations of convex polygons, log-radial grids.

The weight (distance + offset)^(-p) is singular at Dirichlet pieces and the
minimizers behave like distance^((p-1)/p) there, so meshes grade
geometrically toward those pieces instead of resolving tubular coordinates.
Interval grading uses a two-zone layout: a geometric layer with exact
spacing ratio near each graded endpoint, uniform cells elsewhere, with the
layer depth capped by a relative floor so huge n cannot underflow spacings.

Refinement keeps node sets nested (a refined mesh contains every coarse
node), which makes discrete minimum quotients nonincreasing level over
level. Cells bisect at midpoints; the one cell touching a graded endpoint is
instead replaced by a geometric ladder reaching roughly the squared relative
depth, because concentration studies need the boundary layer to deepen much
faster than midpoint bisection allows.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial import Delaunay, cKDTree

from .errors import MeshError
from .geometry import Ball, ConvexPolygon, ExteriorBall, Interval, inradius

#: Spacing floor for graded layers, relative to the uniform-zone width.
GRADE_FLOOR_REL = 1e-12

#: Default geometric spacing ratio toward graded pieces.
DEFAULT_GRADE_RATIO = 0.7


@dataclass(frozen=True, eq=False)
class Mesh1D:
    """Strictly increasing nodes with piece tags for the two endpoints.

    ``endpoint_pieces`` holds the boundary piece id governing each endpoint,
    or None when the endpoint is not part of the boundary (the center of a
    ball in the radial reduction).
    """

    nodes: np.ndarray
    endpoint_pieces: tuple = (0, 1)
    graded_toward: tuple = ()
    grade_ratio: float = DEFAULT_GRADE_RATIO

    def __post_init__(self):
        nodes = np.asarray(self.nodes, dtype=float)
        if nodes.ndim != 1 or len(nodes) < 2:
            raise MeshError("mesh needs at least two nodes")
        if not np.all(np.diff(nodes) > 0):
            raise MeshError("nodes must be strictly increasing")
        object.__setattr__(self, "nodes", nodes)

    @property
    def n_cells(self) -> int:
        return len(self.nodes) - 1

    def summary(self) -> dict:
        h = np.diff(self.nodes)
        return {
            "kind": "interval",
            "cells": self.n_cells,
            "h_min": float(h.min()),
            "h_max": float(h.max()),
        }


@dataclass(frozen=True, eq=False)
class RadialLogMesh:
    """Nodes in s = log(r / R), from 0 to log(rho_max / R)."""

    s_nodes: np.ndarray

    def __post_init__(self):
        s = np.asarray(self.s_nodes, dtype=float)
        if s.ndim != 1 or len(s) < 2:
            raise MeshError("mesh needs at least two nodes")
        if abs(s[0]) > 1e-15 or not np.all(np.diff(s) > 0):
            raise MeshError("s nodes must start at 0 and increase strictly")
        object.__setattr__(self, "s_nodes", s)

    @property
    def n_cells(self) -> int:
        return len(self.s_nodes) - 1

    def summary(self) -> dict:
        return {
            "kind": "radial_log",
            "cells": self.n_cells,
            "s_max": float(self.s_nodes[-1]),
        }


@dataclass(frozen=True, eq=False)
class TriMesh:
    """Conforming triangulation with tagged boundary edges.

    ``boundary_edges`` is an integer array of shape (k, 2) of vertex index
    pairs lying on the polygon boundary and ``boundary_piece`` the matching
    piece id per edge. Triangles are positively oriented.
    """

    vertices: np.ndarray
    triangles: np.ndarray
    boundary_edges: np.ndarray
    boundary_piece: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.vertices, dtype=float)
        t = np.asarray(self.triangles, dtype=np.intp)
        if signed_areas(v, t).min() <= 0:
            raise MeshError("triangles must be positively oriented with positive area")
        object.__setattr__(self, "vertices", v)
        object.__setattr__(self, "triangles", t)
        object.__setattr__(self, "boundary_edges", np.asarray(self.boundary_edges, dtype=np.intp))
        object.__setattr__(self, "boundary_piece", np.asarray(self.boundary_piece, dtype=np.intp))

    @property
    def n_cells(self) -> int:
        return len(self.triangles)

    def summary(self) -> dict:
        return {
            "kind": "triangulation",
            "vertices": len(self.vertices),
            "cells": self.n_cells,
            "min_angle_deg": float(min_angle_degrees(self)),
        }


def signed_areas(vertices, triangles):
    p = vertices[triangles]
    return 0.5 * (
        (p[:, 1, 0] - p[:, 0, 0]) * (p[:, 2, 1] - p[:, 0, 1])
        - (p[:, 2, 0] - p[:, 0, 0]) * (p[:, 1, 1] - p[:, 0, 1])
    )


def min_angle_degrees(mesh: TriMesh) -> float:
    p = mesh.vertices[mesh.triangles]
    worst = 180.0
    for k in range(3):
        u = p[:, (k + 1) % 3] - p[:, k]
        v = p[:, (k + 2) % 3] - p[:, k]
        c = (u * v).sum(1) / np.sqrt((u * u).sum(1) * (v * v).sum(1))
        ang = np.degrees(np.arccos(np.clip(c, -1.0, 1.0)))
        worst = min(worst, float(ang.min()))
    return worst


def graded_spacings(n: int, ratio: float, toward: tuple, length: float, floor_rel: float = GRADE_FLOOR_REL):
    """Cell widths of the two-zone graded layout, summing to ``length``."""
    if n < 2:
        raise MeshError(f"need at least 2 cells, got {n}")
    if not (0.0 < ratio <= 1.0):
        raise MeshError(f"grade ratio must lie in (0, 1], got {ratio}")
    ends = [e for e in (0, 1) if e in toward]
    if ratio == 1.0 or not ends:
        return np.full(n, length / n)
    layer = int(np.ceil(np.log(floor_rel * n) / np.log(ratio)))
    layer = max(1, min(layer, (n - 1) // len(ends) if len(ends) == 2 else n - 1))
    geo = ratio ** np.arange(1, layer + 1)
    uniform_width = length / (n - len(ends) * layer + len(ends) * geo.sum())
    left = uniform_width * geo[::-1] if 0 in toward else np.empty(0)
    right = uniform_width * geo if 1 in toward else np.empty(0)
    middle = np.full(n - len(left) - len(right), uniform_width)
    return np.concatenate([left, middle, right])


def build_interval_mesh(
    domain: Interval,
    n: int,
    grade_ratio: float = DEFAULT_GRADE_RATIO,
    toward: tuple = (),
    floor_rel: float = GRADE_FLOOR_REL,
) -> Mesh1D:
    """Graded mesh of an interval; ``toward`` lists endpoint piece ids."""
    bad = [t for t in toward if t not in (0, 1)]
    if bad:
        raise MeshError(f"interval has pieces 0 and 1, cannot grade toward {bad}")
    spac = graded_spacings(n, grade_ratio, tuple(toward), domain.b - domain.a, floor_rel)
    nodes = domain.a + np.concatenate([[0.0], np.cumsum(spac)])
    nodes[-1] = domain.b
    return Mesh1D(nodes, (0, 1), tuple(sorted(toward)), grade_ratio)


def build_radial_mesh(domain, n: int, grade_ratio: float = DEFAULT_GRADE_RATIO, toward: tuple = ()):
    """Radial grids: uniform in log(r/R) outside a ball, plain radius inside.

    For a Ball the result is a Mesh1D on [0, R] whose left endpoint is the
    center (no boundary piece); grading, when requested, can only target the
    sphere piece 0.
    """
    if n < 2:
        raise MeshError(f"need at least 2 cells, got {n}")
    if isinstance(domain, ExteriorBall):
        if toward:
            raise MeshError("log-radial grids are uniform; grading is unsupported")
        s_max = np.log(domain.truncation / domain.radius)
        return RadialLogMesh(np.linspace(0.0, s_max, n + 1))
    if isinstance(domain, Ball):
        if any(t != 0 for t in toward):
            raise MeshError("ball boundary is the single piece 0")
        ends = (1,) if toward else ()
        spac = graded_spacings(n, grade_ratio if toward else 1.0, ends, domain.radius)
        nodes = np.concatenate([[0.0], np.cumsum(spac)])
        nodes[-1] = domain.radius
        return Mesh1D(nodes, (None, 0), (1,) if toward else (), grade_ratio)
    raise MeshError(f"radial meshes need a Ball or ExteriorBall, got {type(domain).__name__}")


def refine_mesh(mesh):
    """Nested refinement: every coarse node survives into the fine mesh.

    Plain cells bisect at midpoints. A cell touching a graded endpoint is
    subdivided by a geometric ladder that roughly squares the relative layer
    depth, so repeated refinement drives the boundary layer deep enough for
    concentration measurements while keeping trial spaces nested.
    """
    if isinstance(mesh, RadialLogMesh):
        s = mesh.s_nodes
        out = np.empty(2 * len(s) - 1)
        out[0::2] = s
        out[1::2] = 0.5 * (s[:-1] + s[1:])
        return RadialLogMesh(out)
    if isinstance(mesh, TriMesh):
        return _refine_trimesh(mesh)
    nodes = mesh.nodes
    a, b = nodes[0], nodes[-1]
    length = b - a
    # graded_toward stores end indices (0 = left, 1 = right); for intervals
    # these coincide with the endpoint piece ids.
    ends = mesh.graded_toward
    lo = 1 if 0 in ends else 0
    hi = len(nodes) - 2 if 1 in ends else len(nodes) - 1
    parts = [nodes, 0.5 * (nodes[lo:hi] + nodes[lo + 1 : hi + 1])]
    ratio = mesh.grade_ratio if mesh.grade_ratio < 1.0 else DEFAULT_GRADE_RATIO
    if 0 in ends:
        w = nodes[1] - a
        k = max(1, int(np.ceil(np.log(w / length) / np.log(ratio))))
        parts.append(a + w * ratio ** np.arange(1, k + 1))
    if 1 in ends:
        w = b - nodes[-2]
        k = max(1, int(np.ceil(np.log(w / length) / np.log(ratio))))
        parts.append(b - w * ratio ** np.arange(1, k + 1))
    return Mesh1D(np.sort(np.concatenate(parts)), mesh.endpoint_pieces, mesh.graded_toward, mesh.grade_ratio)


def _refine_trimesh(mesh: TriMesh) -> TriMesh:
    """Regular 4-way subdivision; children are similar to their parents."""
    v, t = mesh.vertices, mesh.triangles
    edges = np.concatenate([t[:, [0, 1]], t[:, [1, 2]], t[:, [2, 0]]])
    edges = np.sort(edges, axis=1)
    uniq, inverse = np.unique(edges, axis=0, return_inverse=True)
    mid = 0.5 * (v[uniq[:, 0]] + v[uniq[:, 1]])
    mid_idx = len(v) + np.arange(len(uniq))
    m01, m12, m20 = (mid_idx[inverse[i * len(t) : (i + 1) * len(t)]] for i in range(3))
    new_t = np.concatenate(
        [
            np.column_stack([t[:, 0], m01, m20]),
            np.column_stack([t[:, 1], m12, m01]),
            np.column_stack([t[:, 2], m20, m12]),
            np.column_stack([m01, m12, m20]),
        ]
    )
    key = {tuple(e): i for i, e in enumerate(uniq)}
    be, bp = [], []
    for (i, j), piece in zip(mesh.boundary_edges, mesh.boundary_piece):
        m = len(v) + key[tuple(sorted((int(i), int(j))))]
        be.extend([(i, m), (m, j)])
        bp.extend([piece, piece])
    return TriMesh(np.vstack([v, mid]), new_t, np.array(be), np.array(bp))


def prolong_values(coarse, fine, values):
    """Transfer nodal values from a mesh onto its refine_mesh image.

    Both refinement rules keep coarse trial spaces nested in fine ones, so
    the prolonged field represents the same function and has the same
    energies and quotient.
    """
    values = np.asarray(values, dtype=float)
    if isinstance(coarse, RadialLogMesh):
        return np.interp(fine.s_nodes, coarse.s_nodes, values)
    if isinstance(coarse, Mesh1D):
        return np.interp(fine.nodes, coarse.nodes, values)
    v, t = coarse.vertices, coarse.triangles
    edges = np.sort(np.concatenate([t[:, [0, 1]], t[:, [1, 2]], t[:, [2, 0]]]), axis=1)
    uniq = np.unique(edges, axis=0)
    if len(v) + len(uniq) != len(fine.vertices):
        raise MeshError("fine mesh is not the refinement of the coarse one")
    return np.concatenate([values, 0.5 * (values[uniq[:, 0]] + values[uniq[:, 1]])])


# ---------------------------------------------------------------------------
# Convex polygon triangulation: structured point cloud + Delaunay.
# ---------------------------------------------------------------------------


def _poly_edges(verts):
    return verts, np.roll(verts, -1, axis=0)


def _dist_to_segments(pts, a, b):
    ab = b - a
    denom = (ab * ab).sum(axis=1)
    ap = pts[:, None, :] - a[None, :, :]
    t = np.clip((ap * ab[None, :, :]).sum(axis=2) / denom[None, :], 0.0, 1.0)
    proj = a[None, :, :] + t[..., None] * ab[None, :, :]
    d = pts[:, None, :] - proj
    return np.sqrt((d * d).sum(axis=2))


def _size_function(pts, verts, grade_near, depth, h, growth=0.5):
    target = np.full(len(pts), h)
    a, b = _poly_edges(verts)
    for pid in grade_near:
        d = _dist_to_segments(pts, a[pid : pid + 1], b[pid : pid + 1])[:, 0]
        target = np.minimum(target, np.clip(h / 4 + growth * np.maximum(d - depth, 0.0), h / 4, h))
    return target


def _inside_convex(pts, verts):
    a, b = _poly_edges(verts)
    e = b - a
    cr = e[None, :, 0] * (pts[:, None, 1] - a[None, :, 1]) - e[None, :, 1] * (
        pts[:, None, 0] - a[None, :, 0]
    )
    return (cr > 1e-12).all(axis=1)


def _boundary_samples(verts, grade_near, depth, h):
    pts, pieces = [], []
    a_all, b_all = _poly_edges(verts)
    for pid, (a, b) in enumerate(zip(a_all, b_all)):
        length = float(np.hypot(*(b - a)))
        t = [0.0]
        while t[-1] < 1.0:
            x = a + t[-1] * (b - a)
            step = _size_function(x[None, :], verts, grade_near, depth, h)[0] / length
            t.append(min(1.0, t[-1] + step))
        if len(t) > 2 and (t[-1] - t[-2]) < 0.5 * (t[-2] - t[-3]):
            t = t[:-2] + [1.0]
        for ti in t[:-1]:
            pts.append(a + ti * (b - a))
            pieces.append(pid)
    return np.array(pts), np.array(pieces)


def _hex_lattice(lo, hi, spacing):
    row_gap = spacing * np.sqrt(3.0) / 2.0
    rows = []
    y = lo[1]
    j = 0
    while y <= hi[1] + 1e-12:
        xs = np.arange(lo[0] + (spacing / 2 if j % 2 else 0.0), hi[0] + 1e-12, spacing)
        rows.append(np.column_stack([xs, np.full(len(xs), y)]))
        y += row_gap
        j += 1
    return np.vstack(rows)


def build_polygon_mesh(
    domain: ConvexPolygon,
    h: float,
    grade_near: tuple = (),
    grade_depth: float | None = None,
    smooth_iters: int = 4,
) -> TriMesh:
    """Triangulate a convex polygon, target edge h, h/4 near graded pieces.

    The point cloud is structured and the whole construction deterministic:
    boundary samples at the local target size, interior hexagonal lattices
    per resolution level thinned against the boundary and against
    already-kept points, then a fixed number of Laplacian smoothing passes
    with boundary points held in place, then Delaunay.
    """
    if not h > 0:
        raise MeshError("target edge length must be positive")
    verts = domain.vertices
    if grade_depth is None:
        grade_depth = inradius(domain) / 4.0
    bad = [g for g in grade_near if g not in domain.piece_ids()]
    if bad:
        raise MeshError(f"cannot grade near nonexistent pieces {bad}")
    bpts, bpieces = _boundary_samples(verts, grade_near, grade_depth, h)
    kept = [bpts]
    levels = [h, h / 2, h / 4] if grade_near else [h]
    for level in levels:
        cand = _hex_lattice(verts.min(0), verts.max(0), level)
        cand = cand[_inside_convex(cand, verts)]
        if len(cand) == 0:
            continue
        size = _size_function(cand, verts, grade_near, grade_depth, h)
        if grade_near:
            cand = cand[(size >= level * 0.75) & (size < level * 1.5)]
            if len(cand) == 0:
                continue
            size = _size_function(cand, verts, grade_near, grade_depth, h)
        a_all, b_all = _poly_edges(verts)
        d_bnd = _dist_to_segments(cand, a_all, b_all).min(axis=1)
        keep = d_bnd >= 0.55 * size
        cand, size = cand[keep], size[keep]
        if len(cand) == 0:
            continue
        d_near, _ = cKDTree(np.vstack(kept)).query(cand)
        cand = cand[d_near >= 0.75 * size]
        if len(cand):
            kept.append(cand)
    pts = np.vstack(kept)
    pts = _smooth(pts, len(bpts), verts, smooth_iters)
    tri = Delaunay(pts).simplices
    areas = signed_areas(pts, tri)
    tri[areas < 0] = tri[areas < 0][:, ::-1]
    tri = tri[np.abs(areas) > 1e-14 * (h * h)]
    be, bp = _tag_boundary_edges(pts, tri, verts, len(bpts))
    return TriMesh(pts, tri, be, bp)


def _smooth(pts, n_fixed, verts, iters):
    pts = pts.copy()
    for _ in range(iters):
        tri = Delaunay(pts).simplices
        acc = np.zeros_like(pts)
        cnt = np.zeros(len(pts))
        for k in range(3):
            i, j = tri[:, k], tri[:, (k + 1) % 3]
            np.add.at(acc, i, pts[j])
            np.add.at(cnt, i, 1.0)
            np.add.at(acc, j, pts[i])
            np.add.at(cnt, j, 1.0)
        moved = acc / cnt[:, None]
        moved[:n_fixed] = pts[:n_fixed]
        escaped = ~_inside_convex(moved, verts)
        escaped[:n_fixed] = False
        moved[escaped] = pts[escaped]
        pts = moved
    return pts


def _tag_boundary_edges(pts, tri, verts, n_boundary):
    edges = np.sort(
        np.concatenate([tri[:, [0, 1]], tri[:, [1, 2]], tri[:, [2, 0]]]), axis=1
    )
    uniq, counts = np.unique(edges, axis=0, return_counts=True)
    hull = uniq[counts == 1]
    if (hull >= n_boundary).any():
        raise MeshError("hull edge touches an interior point; thinning too aggressive")
    a_all, b_all = _poly_edges(verts)
    be, bp = [], []
    for i, j in hull:
        mid = 0.5 * (pts[i] + pts[j])
        d = _dist_to_segments(mid[None, :], a_all, b_all)[0]
        piece = int(d.argmin())
        if d[piece] > 1e-9:
            raise MeshError("boundary edge does not lie on the polygon boundary")
        be.append((i, j))
        bp.append(piece)
    return np.array(be, dtype=np.intp), np.array(bp, dtype=np.intp)


def mesh_to_json(mesh) -> dict:
    """Debug-oriented JSON form (vertices, cells, tags); not a stable format."""
    if isinstance(mesh, Mesh1D):
        return {
            "kind": "interval",
            "nodes": mesh.nodes.tolist(),
            "endpoint_pieces": list(mesh.endpoint_pieces),
            "graded_toward": list(mesh.graded_toward),
        }
    if isinstance(mesh, RadialLogMesh):
        return {"kind": "radial_log", "s_nodes": mesh.s_nodes.tolist()}
    return {
        "kind": "triangulation",
        "vertices": mesh.vertices.tolist(),
        "triangles": mesh.triangles.tolist(),
        "boundary_edges": mesh.boundary_edges.tolist(),
        "boundary_piece": mesh.boundary_piece.tolist(),
    }
