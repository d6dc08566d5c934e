"""Domains, boundary pieces, distance functions, projections, in-radii.

Supported geometry is deliberately small: intervals, planar convex polygons,
balls, and the (truncated) exterior of a ball. Each admits a closed-form
distance to the boundary and an exact nearest-point map, which keeps the
singular weight (distance + offset)^(-p) free of geometric approximation
error. Curved convex domains in higher dimension are out of scope.

Boundary pieces are indexed by small integers:

* ``Interval``: piece 0 is the left endpoint, piece 1 the right.
* ``ConvexPolygon``: piece i is the edge from vertex i to vertex i+1 (wrap).
* ``Ball`` / ``ExteriorBall``: piece 0 is the sphere of radius R.

Where several boundary points are nearest (the singular set), projections
resolve the tie deterministically: lowest piece id first, then the
lexicographically smallest point within the piece. The reported multiplicity
lets callers audit that choice.
"""

from __future__ import annotations

import math
import sys
from dataclasses import dataclass
from typing import Mapping, Sequence, Union

import numpy as np
from scipy.optimize import linprog

from .errors import DomainError, ParameterError, PartitionError

#: Multiplicity reported when an entire sphere is nearest (ball center).
WHOLE_SPHERE = sys.maxsize

#: Condition value encoding a Dirichlet piece (sigma = +infinity).
DIRICHLET = math.inf


@dataclass(frozen=True)
class Interval:
    a: float
    b: float

    def __post_init__(self):
        if not self.b > self.a:
            raise DomainError(f"interval needs b > a, got [{self.a}, {self.b}]")

    @property
    def dim(self) -> int:
        return 1

    def piece_ids(self):
        return (0, 1)


@dataclass(frozen=True, eq=False)
class ConvexPolygon:
    """Strictly convex planar polygon with counter-clockwise vertices."""

    vertices: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.vertices, dtype=float)
        if v.ndim != 2 or v.shape[1] != 2 or len(v) < 3:
            raise DomainError("polygon needs >= 3 planar vertices")
        e = np.roll(v, -1, axis=0) - v
        cross = e[:, 0] * np.roll(e, -1, axis=0)[:, 1] - e[:, 1] * np.roll(e, -1, axis=0)[:, 0]
        if not np.all(cross > 0):
            raise DomainError("vertices must be counter-clockwise and strictly convex")
        object.__setattr__(self, "vertices", v)

    @property
    def dim(self) -> int:
        return 2

    @property
    def edges(self):
        v = self.vertices
        return v, np.roll(v, -1, axis=0)

    def piece_ids(self):
        return tuple(range(len(self.vertices)))


@dataclass(frozen=True)
class Ball:
    dim: int
    radius: float

    def __post_init__(self):
        if self.dim < 1:
            raise DomainError("ball dimension must be >= 1")
        if not self.radius > 0:
            raise DomainError("ball radius must be positive")

    def piece_ids(self):
        return (0,)


@dataclass(frozen=True)
class ExteriorBall:
    """Complement of a ball, truncated at |x| = truncation for computation."""

    dim: int
    radius: float
    truncation: float

    def __post_init__(self):
        if self.dim < 1:
            raise DomainError("dimension must be >= 1")
        if not (self.truncation > self.radius > 0):
            raise DomainError("need truncation > radius > 0")

    def piece_ids(self):
        return (0,)


Domain = Union[Interval, ConvexPolygon, Ball, ExteriorBall]


@dataclass(frozen=True)
class BoundaryPiece:
    piece_id: int
    sigma: float  # DIRICHLET (= inf) pins the trace to zero

    def __post_init__(self):
        if not (self.sigma >= 0):
            raise PartitionError(f"sigma must be >= 0 or inf, got {self.sigma}")

    @property
    def is_dirichlet(self) -> bool:
        return math.isinf(self.sigma)


@dataclass(frozen=True)
class BoundaryPartition:
    """Assignment of a Dirichlet or Robin condition to every boundary piece."""

    pieces: tuple

    def __post_init__(self):
        seen = set()
        for pc in self.pieces:
            if pc.piece_id in seen:
                raise PartitionError(f"duplicate piece id {pc.piece_id}")
            seen.add(pc.piece_id)
        object.__setattr__(self, "_by_id", {pc.piece_id: pc for pc in self.pieces})

    @classmethod
    def from_sigmas(cls, sigmas: Sequence[float] | Mapping[int, float]) -> "BoundaryPartition":
        if isinstance(sigmas, Mapping):
            items = sorted(sigmas.items())
        else:
            items = list(enumerate(sigmas))
        return cls(tuple(BoundaryPiece(i, float(s)) for i, s in items))

    def sigma_of(self, piece_id: int) -> float:
        try:
            return self._by_id[piece_id].sigma
        except KeyError:
            raise PartitionError(f"piece {piece_id} not covered by partition")

    def is_dirichlet(self, piece_id: int) -> bool:
        return math.isinf(self.sigma_of(piece_id))

    @property
    def dirichlet_ids(self):
        return tuple(pc.piece_id for pc in self.pieces if pc.is_dirichlet)

    @property
    def has_dirichlet(self) -> bool:
        return any(pc.is_dirichlet for pc in self.pieces)

    @property
    def sigma_max(self) -> float:
        vals = [pc.sigma for pc in self.pieces if not pc.is_dirichlet]
        return max(vals) if vals else 0.0

    @property
    def sigma_min(self) -> float:
        vals = [pc.sigma for pc in self.pieces if not pc.is_dirichlet]
        return min(vals) if vals else math.inf

    def validate_for(self, domain: Domain):
        need = set(piece_ids(domain))
        have = {pc.piece_id for pc in self.pieces}
        if need != have:
            raise PartitionError(f"partition covers pieces {sorted(have)}, boundary has {sorted(need)}")


def piece_ids(domain: Domain):
    return domain.piece_ids()


def _as_point(domain: Domain, x):
    if isinstance(domain, Interval):
        return float(np.asarray(x).reshape(()))
    pt = np.asarray(x, dtype=float).reshape(-1)
    want = domain.dim
    if pt.shape != (want,):
        raise DomainError(f"expected a {want}-coordinate point, got shape {pt.shape}")
    return pt


def _segment_distances(pts, a, b):
    """Distances from pts (m,2) to each segment a[k]->b[k]; returns (m,k)."""
    ab = b - a  # (k,2)
    denom = (ab * ab).sum(axis=1)  # (k,)
    ap = pts[:, None, :] - a[None, :, :]  # (m,k,2)
    t = np.clip((ap * ab[None, :, :]).sum(axis=2) / denom[None, :], 0.0, 1.0)
    proj = a[None, :, :] + t[..., None] * ab[None, :, :]
    d = pts[:, None, :] - proj
    return np.sqrt((d * d).sum(axis=2)), proj, t


def distance_to_boundary(domain: Domain, x) -> float:
    """Distance from a point in the closure of the domain to its boundary."""
    if isinstance(domain, Interval):
        t = _as_point(domain, x)
        if t < domain.a - 1e-12 or t > domain.b + 1e-12:
            raise DomainError(f"point {t} outside [{domain.a}, {domain.b}]")
        return min(t - domain.a, domain.b - t)
    pt = _as_point(domain, x)
    if isinstance(domain, ConvexPolygon):
        a, b = domain.edges
        dists, _, _ = _segment_distances(pt[None, :], a, b)
        if not _inside_polygon(pt[None, :], domain)[0] and dists.min() > 1e-12:
            raise DomainError("point outside polygon closure")
        return float(dists.min())
    r = float(np.linalg.norm(pt))
    if isinstance(domain, Ball):
        if r > domain.radius + 1e-12:
            raise DomainError("point outside ball closure")
        return domain.radius - min(r, domain.radius)
    # ExteriorBall: the true boundary is the inner sphere; the truncation
    # sphere is a computational artifact, not part of the boundary.
    if r < domain.radius - 1e-12:
        raise DomainError("point inside the excluded ball")
    return r - domain.radius


def _inside_polygon(pts, poly: ConvexPolygon):
    a, b = poly.edges
    e = b - a
    cr = e[None, :, 0] * (pts[:, None, 1] - a[None, :, 1]) - e[None, :, 1] * (
        pts[:, None, 0] - a[None, :, 0]
    )
    return (cr >= -1e-12).all(axis=1)


def boundary_projection(domain: Domain, x, tol: float = 1e-9):
    """Nearest boundary point with deterministic tie-breaking.

    Returns ``(point, piece_id, multiplicity)``. On the singular set the
    piece with the lowest id wins and multiplicity counts how many boundary
    points attain the minimum within ``tol`` (``WHOLE_SPHERE`` at a ball
    center, where every sphere point is nearest).
    """
    if isinstance(domain, Interval):
        t = _as_point(domain, x)
        dl, dr = t - domain.a, domain.b - t
        if abs(dl - dr) <= tol:
            return domain.a, 0, 2
        return (domain.a, 0, 1) if dl < dr else (domain.b, 1, 1)
    pt = _as_point(domain, x)
    if isinstance(domain, ConvexPolygon):
        a, b = domain.edges
        dists, proj, _ = _segment_distances(pt[None, :], a, b)
        dists, proj = dists[0], proj[0]
        dmin = dists.min()
        tied = np.flatnonzero(dists <= dmin + tol)
        # Nearest points on adjacent edges can coincide at a shared vertex;
        # count distinct boundary points, not edges.
        pts_tied = proj[tied]
        distinct = _distinct_rows(pts_tied, tol)
        k = int(tied[0])
        return proj[k].copy(), k, max(1, distinct)
    r = float(np.linalg.norm(pt))
    if isinstance(domain, Ball):
        if r <= tol:
            south = np.zeros(domain.dim)
            south[0] = -domain.radius
            return south, 0, WHOLE_SPHERE
        return pt * (domain.radius / r), 0, 1
    return pt * (domain.radius / r), 0, 1


def _distinct_rows(rows, tol):
    kept = []
    for row in rows:
        if all(np.linalg.norm(row - k) > tol for k in kept):
            kept.append(row)
    return len(kept)


def nearest_count(domain: Domain, x, tol: float = 1e-9) -> int:
    """Number of boundary points attaining the minimum distance within tol."""
    return boundary_projection(domain, x, tol)[2]


def inradius(domain: Domain) -> float:
    """Radius of the largest inscribed ball."""
    if isinstance(domain, Interval):
        return 0.5 * (domain.b - domain.a)
    if isinstance(domain, Ball):
        return domain.radius
    if isinstance(domain, ExteriorBall):
        raise DomainError("exterior domain has unbounded inscribed balls")
    a, b = domain.edges
    e = b - a
    lengths = np.linalg.norm(e, axis=1)
    n_in = np.column_stack([-e[:, 1], e[:, 0]]) / lengths[:, None]
    # maximize r subject to n_i . x - r >= n_i . a_i for every edge
    A_ub = np.column_stack([-n_in, np.ones(len(e))])
    b_ub = -(n_in * a).sum(axis=1)
    res = linprog(c=[0.0, 0.0, -1.0], A_ub=A_ub, b_ub=b_ub, bounds=[(None, None)] * 3, method="highs")
    if not res.success:
        raise DomainError(f"inscribed-circle program failed: {res.message}")
    return float(res.x[2])


def piece_measure(domain: Domain, piece_id: int) -> float:
    """Surface measure of one boundary piece (counting measure for points)."""
    if isinstance(domain, Interval):
        if piece_id not in (0, 1):
            raise DomainError(f"interval has pieces 0 and 1, not {piece_id}")
        return 1.0
    if isinstance(domain, ConvexPolygon):
        a, b = domain.edges
        return float(np.linalg.norm(b[piece_id] - a[piece_id]))
    if piece_id != 0:
        raise DomainError("sphere domains have a single piece 0")
    return sphere_area(domain.dim, domain.radius)


def sphere_area(dim: int, radius: float) -> float:
    """Surface area of the sphere |x| = radius in R^dim."""
    if dim == 1:
        return 2.0  # two endpoints
    return 2.0 * math.pi ** (dim / 2.0) / math.gamma(dim / 2.0) * radius ** (dim - 1)


def project_points(domain: Domain, pts):
    """Vectorized distances and governing piece ids for many points.

    Used to build weight caches at quadrature points. Points are assumed to
    lie in the closure of the domain. Returns ``(delta, piece)`` arrays.
    """
    if isinstance(domain, Interval):
        t = np.asarray(pts, dtype=float).reshape(-1)
        dl, dr = t - domain.a, domain.b - t
        return np.minimum(dl, dr), np.where(dl <= dr, 0, 1)
    pts = np.asarray(pts, dtype=float)
    if isinstance(domain, ConvexPolygon):
        a, b = domain.edges
        dists, _, _ = _segment_distances(pts, a, b)
        return dists.min(axis=1), dists.argmin(axis=1)
    r = np.linalg.norm(pts, axis=-1)
    if isinstance(domain, Ball):
        return domain.radius - r, np.zeros(len(r), dtype=np.intp)
    return r - domain.radius, np.zeros(len(r), dtype=np.intp)
