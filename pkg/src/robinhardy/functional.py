"""Discrete energies, the weighted norm, and the Rayleigh quotient.

Fields are piecewise linear on the mesh. Gradient energies are exact per
cell (the gradient is constant there); |u|^p terms use the fixed quadrature
rules from ``_quadrature``. A ``QuotientForm`` bundles everything one
problem needs: geometric measures, the singular weight cached at quadrature
points, Robin boundary terms, and the Dirichlet pin mask.

For radial meshes over a ball the reported energies are genuine integrals
over the n-dimensional ball (the sphere-area factor is included), so
boundary_energy of the constant 1 equals sigma times the sphere area, just
as it equals sigma times the perimeter on a polygon.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels as K
from ._quadrature import SEG_W, SEG_XI, TRI_BARY, TRI_W
from .errors import DegenerateFieldError, MeshError, ParameterError
from .geometry import (
    Ball,
    BoundaryPartition,
    ConvexPolygon,
    Domain,
    Interval,
    sphere_area,
)
from .mesh import Mesh1D, TriMesh, signed_areas
from .weights import WeightCache


@dataclass(eq=False)
class Field:
    """Nodal values with Dirichlet vertices pinned to zero."""

    mesh: object
    values: np.ndarray
    pinned: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float).copy()
        self.pinned = np.asarray(self.pinned, dtype=bool)
        if self.values.shape != self.pinned.shape:
            raise ParameterError("values and pin mask must have matching shape")
        if not np.all(np.isfinite(self.values)):
            raise ParameterError("field values must be finite")
        self.values[self.pinned] = 0.0


class QuotientForm:
    """Evaluator for one (domain, partition, mesh, p) quadruple.

    Builds the quadrature-point weight cache once and exposes the three
    energies, the quotient, and its nodal gradient. Nodal value vectors are
    accepted directly so optimization loops can avoid Field wrappers.
    """

    def __init__(self, domain: Domain, partition: BoundaryPartition, mesh, p: float):
        if not p > 1:
            raise ParameterError(f"exponent must satisfy p > 1, got {p}")
        partition.validate_for(domain)
        self.domain = domain
        self.partition = partition
        self.mesh = mesh
        self.p = float(p)
        if isinstance(mesh, Mesh1D):
            self._build_1d()
        elif isinstance(mesh, TriMesh):
            if not isinstance(domain, ConvexPolygon):
                raise MeshError("triangulations pair with polygon domains")
            self._build_2d()
        else:
            raise MeshError(f"unsupported mesh type {type(mesh).__name__}")

    # -- assembly ----------------------------------------------------------

    def _build_1d(self):
        mesh, domain = self.mesh, self.domain
        nodes = mesh.nodes
        n1 = len(nodes)
        if isinstance(domain, Interval):
            if mesh.endpoint_pieces != (0, 1):
                raise MeshError("interval meshes must tag endpoints with pieces (0, 1)")
            radial_dim = None
            if abs(nodes[0] - domain.a) > 1e-12 or abs(nodes[-1] - domain.b) > 1e-12:
                raise MeshError("mesh endpoints must match the interval")
        elif isinstance(domain, Ball):
            if mesh.endpoint_pieces != (None, 0):
                raise MeshError("ball meshes run from the center (untagged) to the sphere")
            if abs(nodes[0]) > 1e-12 or abs(nodes[-1] - domain.radius) > 1e-12:
                raise MeshError("radial mesh must span [0, R]")
            radial_dim = domain.dim
        else:
            raise MeshError("1D meshes pair with Interval or Ball domains")

        h = np.diff(nodes)
        self.i0 = np.arange(n1 - 1, dtype=np.intp)
        self.i1 = self.i0 + 1
        self.inv_h = 1.0 / h
        qpts = nodes[:-1, None] + h[:, None] * SEG_XI[None, :]
        if radial_dim is None:
            self.grad_measure = h
            geo = h[:, None] * SEG_W[None, :]
            wc_points = qpts.reshape(-1)
        else:
            n = radial_dim
            area1 = sphere_area(n, 1.0)
            self.grad_measure = area1 * (nodes[1:] ** n - nodes[:-1] ** n) / n
            geo = area1 * qpts ** (n - 1) * h[:, None] * SEG_W[None, :]
            # the weight cache wants points of the ambient space; radial
            # symmetry lets us embed along the first axis
            wc_points = np.zeros((qpts.size, n))
            wc_points[:, 0] = qpts.reshape(-1)
        self.weight = WeightCache.at_points(self.domain, self.partition, self.p, wc_points)
        self.mass_qw = geo * self.weight.w.reshape(geo.shape)
        self.plain_qw = geo
        self.phi0 = 1.0 - SEG_XI
        self.phi1 = SEG_XI.copy()

        self.robin_nodes = []
        self.robin_coefs = []
        pinned = np.zeros(n1, dtype=bool)
        for end, node in ((0, 0), (1, n1 - 1)):
            piece = mesh.endpoint_pieces[end]
            if piece is None:
                continue
            sigma = self.partition.sigma_of(piece)
            if math.isinf(sigma):
                pinned[node] = True
            elif sigma > 0:
                measure = 1.0 if radial_dim is None else sphere_area(radial_dim, nodes[node])
                self.robin_nodes.append(node)
                self.robin_coefs.append(sigma * measure)
        self.pinned = pinned
        self.bseg = None
        self.tri = None
        self._centroids = 0.5 * (nodes[:-1] + nodes[1:])

    def _build_2d(self):
        mesh = self.mesh
        v, t = mesh.vertices, mesh.triangles
        area = signed_areas(v, t)
        p0, p1, p2 = v[t[:, 0]], v[t[:, 1]], v[t[:, 2]]
        inv2a = 1.0 / (2.0 * area)
        self.gx = np.column_stack([(p1[:, 1] - p2[:, 1]), (p2[:, 1] - p0[:, 1]), (p0[:, 1] - p1[:, 1])]) * inv2a[:, None]
        self.gy = np.column_stack([(p2[:, 0] - p1[:, 0]), (p0[:, 0] - p2[:, 0]), (p1[:, 0] - p0[:, 0])]) * inv2a[:, None]
        self.tri = t
        self.grad_measure = area
        qpts = np.einsum("qk,ckd->cqd", TRI_BARY, v[t])
        geo = area[:, None] * TRI_W[None, :]
        self.weight = WeightCache.at_points(self.domain, self.partition, self.p, qpts.reshape(-1, 2))
        self.mass_qw = geo * self.weight.w.reshape(geo.shape)
        self.plain_qw = geo
        self.bary = TRI_BARY

        pinned = np.zeros(len(v), dtype=bool)
        b0, b1, coefs = [], [], []
        for (i, j), piece in zip(mesh.boundary_edges, mesh.boundary_piece):
            sigma = self.partition.sigma_of(int(piece))
            if math.isinf(sigma):
                pinned[i] = pinned[j] = True
            elif sigma > 0:
                b0.append(i)
                b1.append(j)
                coefs.append(sigma * np.linalg.norm(v[j] - v[i]))
        self.pinned = pinned
        if b0:
            self.bseg = (
                np.asarray(b0, dtype=np.intp),
                np.asarray(b1, dtype=np.intp),
                np.asarray(coefs)[:, None] * SEG_W[None, :],
            )
        else:
            self.bseg = None
        self.robin_nodes = []
        self.robin_coefs = []
        self.phi0 = 1.0 - SEG_XI
        self.phi1 = SEG_XI.copy()
        self._centroids = v[t].mean(axis=1)

    # -- public evaluation --------------------------------------------------

    def field(self, values) -> Field:
        return Field(self.mesh, values, self.pinned)

    def _vals(self, u):
        if isinstance(u, Field):
            return u.values
        return np.asarray(u, dtype=float)

    def gradient_energy(self, u) -> float:
        """Integral of |grad u|^p over the domain, exact per cell."""
        u = self._vals(u)
        if self.tri is not None:
            return K.tri_grad_energy(u, self.tri, self.gx, self.gy, self.grad_measure, self.p)
        return K.seg_grad_energy(u, self.i0, self.i1, self.inv_h, self.grad_measure, self.p)

    def cell_gradient_energies(self, u) -> np.ndarray:
        """Per-cell contributions to gradient_energy (concentration probes)."""
        u = self._vals(u)
        if self.tri is not None:
            ut = u[self.tri]
            dx = (ut * self.gx).sum(axis=1)
            dy = (ut * self.gy).sum(axis=1)
            return np.hypot(dx, dy) ** self.p * self.grad_measure
        slope = (u[self.i1] - u[self.i0]) * self.inv_h
        return np.abs(slope) ** self.p * self.grad_measure

    def cell_centroids(self) -> np.ndarray:
        return self._centroids

    def boundary_energy(self, u) -> float:
        """Sum of sigma * integral |u|^p over Robin pieces."""
        u = self._vals(u)
        total = 0.0
        for node, coef in zip(self.robin_nodes, self.robin_coefs):
            total += coef * abs(u[node]) ** self.p
        if self.bseg is not None:
            b0, b1, qw = self.bseg
            total += K.seg_mass(u, b0, b1, qw, self.phi0, self.phi1, self.p)
        return total

    def weighted_norm_pp(self, u) -> float:
        """p-th power of the weighted norm: integral of w |u|^p."""
        u = self._vals(u)
        if self.tri is not None:
            return K.tri_mass(u, self.tri, self.mass_qw, self.bary, self.p)
        return K.seg_mass(u, self.i0, self.i1, self.mass_qw, self.phi0, self.phi1, self.p)

    def plain_norm_pp(self, u, weight_values=None) -> float:
        """Integral of |u|^p, optionally against substitute point weights."""
        u = self._vals(u)
        qw = self.plain_qw if weight_values is None else self.plain_qw * weight_values.reshape(self.plain_qw.shape)
        if self.tri is not None:
            return K.tri_mass(u, self.tri, qw, self.bary, self.p)
        return K.seg_mass(u, self.i0, self.i1, qw, self.phi0, self.phi1, self.p)

    def numerator(self, u) -> float:
        return self.gradient_energy(u) + self.boundary_energy(u)

    def rayleigh(self, u) -> float:
        u = self._vals(u)
        denom = self.weighted_norm_pp(u)
        if not denom > 0:
            raise DegenerateFieldError("weighted norm of the field vanishes")
        return self.numerator(u) / denom

    def rayleigh_gradient(self, u, eps_rel: float = 1e-12):
        """Quotient value and its gradient in the unpinned nodal values.

        The |grad u|^(p-2) factor is regularized as (|grad u|^2 + eps^2)^((p-2)/2)
        with eps = eps_rel * rms slope, in the gradient only, and only when
        p < 2 (energies keep the exact integrand).
        """
        u = self._vals(u)
        grad_num = np.zeros_like(u)
        grad_den = np.zeros_like(u)
        eps2 = 0.0
        if self.p < 2.0:
            scale = self._slope_rms(u)
            eps2 = (eps_rel * max(scale, 1.0)) ** 2
        if self.tri is not None:
            num = K.tri_grad_energy_grad(u, self.tri, self.gx, self.gy, self.grad_measure, self.p, eps2, grad_num)
            den = K.tri_mass_grad(u, self.tri, self.mass_qw, self.bary, self.p, grad_den)
        else:
            num = K.seg_grad_energy_grad(u, self.i0, self.i1, self.inv_h, self.grad_measure, self.p, eps2, grad_num)
            den = K.seg_mass_grad(u, self.i0, self.i1, self.mass_qw, self.phi0, self.phi1, self.p, grad_den)
        for node, coef in zip(self.robin_nodes, self.robin_coefs):
            if u[node] != 0.0:
                num += coef * abs(u[node]) ** self.p
                grad_num[node] += coef * self.p * abs(u[node]) ** (self.p - 2.0) * u[node]
        if self.bseg is not None:
            b0, b1, qw = self.bseg
            num += K.seg_mass_grad(u, b0, b1, qw, self.phi0, self.phi1, self.p, grad_num)
        if not den > 0:
            raise DegenerateFieldError("weighted norm of the field vanishes")
        q = num / den
        grad = (grad_num - q * grad_den) / den
        grad[self.pinned] = 0.0
        return q, grad

    def _slope_rms(self, u) -> float:
        if self.tri is not None:
            ut = u[self.tri]
            dx = (ut * self.gx).sum(axis=1)
            dy = (ut * self.gy).sum(axis=1)
            sq = dx * dx + dy * dy
        else:
            s = (u[self.i1] - u[self.i0]) * self.inv_h
            sq = s * s
        return float(np.sqrt(sq.mean()))

    def normalize(self, u) -> np.ndarray:
        """Scale nodal values so the weighted norm is exactly 1."""
        u = self._vals(u)
        npp = self.weighted_norm_pp(u)
        if not npp > 0:
            raise DegenerateFieldError("cannot normalize a field with zero weighted norm")
        return u / npp ** (1.0 / self.p)


# -- one-shot wrappers mirroring the operation catalogue ---------------------


def gradient_energy(form: QuotientForm, field) -> float:
    return form.gradient_energy(field)


def boundary_energy(form: QuotientForm, field) -> float:
    return form.boundary_energy(field)


def weighted_norm_pp(form: QuotientForm, field) -> float:
    return form.weighted_norm_pp(field)


def rayleigh(form: QuotientForm, field) -> float:
    return form.rayleigh(field)


def rayleigh_gradient(form: QuotientForm, field):
    return form.rayleigh_gradient(field)
