"""Independent evaluators for the closed-form bounds and test families.

Everything here is deliberately decoupled from the assembly in
``functional``: integrals are done with their own Gauss loops (or
scipy.integrate), so agreement between a solver estimate and an oracle
value is evidence rather than tautology.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad

from .errors import DomainError, InfeasibleProfileError, ParameterError
from .functional import Field, QuotientForm
from .geometry import (
    Ball,
    BoundaryPartition,
    ConvexPolygon,
    Domain,
    Interval,
    boundary_projection,
    distance_to_boundary,
    inradius,
)
from .weights import hardy_constant, robin_offset


@dataclass(frozen=True)
class Profile1D:
    """Piecewise-linear absolutely continuous profile on [0, b]."""

    breakpoints: tuple
    values: tuple

    def __post_init__(self):
        bp = np.asarray(self.breakpoints, dtype=float)
        vals = np.asarray(self.values, dtype=float)
        if bp.ndim != 1 or bp.size < 2:
            raise ParameterError("a profile needs at least two breakpoints")
        if vals.shape != bp.shape:
            raise ParameterError("breakpoints and values must align")
        if not np.all(np.diff(bp) > 0):
            raise ParameterError("breakpoints must increase strictly")
        if abs(bp[0]) > 0:
            raise ParameterError("profiles start at 0")
        if not (np.all(np.isfinite(bp)) and np.all(np.isfinite(vals))):
            raise ParameterError("profile data must be finite")
        object.__setattr__(self, "breakpoints", tuple(float(x) for x in bp))
        object.__setattr__(self, "values", tuple(float(x) for x in vals))

    @property
    def b(self) -> float:
        return self.breakpoints[-1]

    def arrays(self):
        return np.asarray(self.breakpoints), np.asarray(self.values)


def _abs_power_integral(t0, t1, v0, v1, p) -> float:
    """Exact integral of |linear interpolant|^p over one segment."""
    h = t1 - t0
    dv = v1 - v0
    if dv == 0.0:
        return abs(v0) ** p * h
    anti = lambda w: abs(w) ** (p + 1.0) * math.copysign(1.0, w)
    return (anti(v1) - anti(v0)) / ((p + 1.0) * dv / h)


def _weighted_abs_power_integral(t0, t1, v0, v1, p, alpha) -> float:
    """Integral of |interpolant|^p (t+alpha)^{-p}, split at the sign change."""
    h = t1 - t0

    def integrand(t):
        u = v0 + (v1 - v0) * (t - t0) / h
        return abs(u) ** p * (t + alpha) ** (-p)

    cuts = [t0, t1]
    if v0 * v1 < 0.0:
        cuts.insert(1, t0 + h * v0 / (v0 - v1))
    total = 0.0
    for a, b in zip(cuts[:-1], cuts[1:]):
        if b > a:
            total += quad(integrand, a, b, epsrel=1e-11, epsabs=1e-14, limit=200)[0]
    return total


def profile_inequality_sides(profile: Profile1D, sigma: float, p: float) -> tuple:
    """Both sides of the one-dimensional weighted inequality.

    lhs = int |u'|^p + sigma |u(0)|^p, exact per segment. rhs is
    C_p int |u|^p (t+alpha)^{-p} + (p-1) C_p (b+alpha)^{-p} int |u|^p,
    with the plain integral in closed antiderivative form and the weighted
    one by adaptive quadrature per segment (split where u changes sign), so
    the reference values hold to ~1e-12 rather than Gauss-rule accuracy.
    sigma = +inf demands u(0) = 0 and drops the boundary term (the
    Dirichlet trace convention sigma * 0^p = 0).
    """
    if not p > 1:
        raise ParameterError(f"exponent must satisfy p > 1, got {p}")
    if not sigma >= 0:
        raise ParameterError(f"sigma must be >= 0 or +inf, got {sigma}")
    t, v = profile.arrays()
    if math.isinf(sigma):
        if v[0] != 0.0:
            raise InfeasibleProfileError("sigma = +inf requires the profile to vanish at 0")
        boundary = 0.0
    else:
        boundary = sigma * abs(v[0]) ** p
    slopes = np.diff(v) / np.diff(t)
    lhs = float(np.sum(np.abs(slopes) ** p * np.diff(t)) + boundary)

    cp = hardy_constant(p)
    alpha = robin_offset(p, sigma)
    if math.isinf(alpha):
        return lhs, 0.0
    weighted = 0.0
    plain = 0.0
    for k in range(len(t) - 1):
        weighted += _weighted_abs_power_integral(t[k], t[k + 1], v[k], v[k + 1], p, alpha)
        plain += _abs_power_integral(t[k], t[k + 1], v[k], v[k + 1], p)
    rhs = cp * weighted + (p - 1.0) * cp * (profile.b + alpha) ** (-p) * plain
    return lhs, rhs


def robin_lower_bound(p: float, r_in: float, sigma_max: float) -> float:
    """Lower bound for the all-Robin constant on a bounded convex domain.

    C_p * (1 + (1 + p * r_in * sigma_max^{1/(p-1)})^{-p}). Always >= C_p,
    with equality only in the sigma -> infinity limit.
    """
    if not p > 1:
        raise ParameterError(f"exponent must satisfy p > 1, got {p}")
    if not r_in > 0:
        raise ParameterError(f"in-radius must be positive, got {r_in}")
    if not sigma_max > 0:
        raise ParameterError(f"sigma_max must be positive, got {sigma_max}")
    cp = hardy_constant(p)
    if math.isinf(sigma_max):
        return cp
    return cp * (1.0 + (1.0 + p * r_in * sigma_max ** (1.0 / (p - 1.0))) ** (-p))


def improved_hardy_rhs(form: QuotientForm, field, r_in: float | None = None) -> float:
    """Right side of the improved Hardy inequality with the in-radius term.

    C_p * weighted_norm_pp(u) + (p-1) * C_p * int |u|^p (R_in + alpha)^{-p},
    with alpha evaluated pointwise from the boundary piece nearest each
    quadrature point (so Dirichlet pieces contribute R_in^{-p} and
    sigma = 0 pieces contribute nothing).
    """
    if r_in is None:
        r_in = inradius(form.domain)
    cp = hardy_constant(form.p)
    first = cp * form.weighted_norm_pp(field)
    offs = form.weight.offset
    finite = np.isfinite(offs)
    tail_w = np.zeros_like(offs)
    tail_w[finite] = (r_in + offs[finite]) ** (-form.p)
    second = (form.p - 1.0) * cp * form.plain_norm_pp(field, tail_w)
    return float(first + second)


def u_eps_field(form: QuotientForm, anchor, r: float, eps: float, p: float | None = None) -> Field:
    """Boundary-layer trial field concentrating at a Dirichlet anchor point.

    Nodal interpolant of delta^{f+1-1/p} for delta <= eps, tapered linearly
    to zero across eps <= delta <= 2 eps; the exponent offset f equals eps
    within distance r of the anchor, 1/p beyond r+eps, linear between. Its
    quotient descends toward the sharp constant as eps -> 0.
    """
    if p is None:
        p = form.p
    domain, partition, mesh = form.domain, form.partition, form.mesh
    if not eps > 0:
        raise ParameterError("eps must be positive")
    if 2.0 * eps >= inradius(domain):
        raise ParameterError("eps must satisfy 2*eps < in-radius")
    anchor_pt = np.atleast_1d(np.asarray(anchor, dtype=float))
    probe = float(anchor_pt[0]) if isinstance(domain, Interval) else anchor_pt
    _, piece, _ = boundary_projection(domain, probe)
    if distance_to_boundary(domain, probe) > 1e-9:
        raise DomainError("anchor must lie on the boundary")
    if not partition.is_dirichlet(piece):
        raise DomainError("anchor must lie on a Dirichlet piece")
    _check_ball_stays_on_dirichlet(domain, partition, anchor_pt, r + eps)

    if isinstance(domain, Interval):
        pts = mesh.nodes
        delta = np.minimum(pts - domain.a, domain.b - pts)
        dist_anchor = np.abs(pts - anchor_pt[0])
    elif isinstance(domain, ConvexPolygon):
        from .geometry import project_points

        pts = mesh.vertices
        delta, _ = project_points(domain, pts)
        dist_anchor = np.linalg.norm(pts - anchor_pt[None, :], axis=1)
    else:
        raise DomainError("layer fields are built on interval or polygon meshes")

    f = np.full(delta.shape, 1.0 / p)
    f[dist_anchor <= r] = eps
    mid = (dist_anchor > r) & (dist_anchor < r + eps)
    f[mid] = eps + (1.0 / p - eps) * (dist_anchor[mid] - r) / eps

    expo = f + 1.0 - 1.0 / p
    vals = np.zeros(delta.shape)
    core = delta <= eps
    vals[core] = np.maximum(delta[core], 0.0) ** expo[core]
    taper = (delta > eps) & (delta < 2.0 * eps)
    vals[taper] = eps ** expo[taper] * (2.0 * eps - delta[taper]) / eps
    return form.field(vals)


def boundary_layer_quotient(p: float, eps: float, r: float = 0.2, b: float = 1.0, sigma_far: float = math.inf) -> float:
    """Exact quotient of the layer family on [0, b] with a Dirichlet left end.

    The trial function lives in the collar delta <= 2*eps: near the anchor
    (x <= r it is delta^{eps+1-1/p}, steep enough to imitate the critical
    profile) and near the far end it is plainly linear in delta. All pieces
    are powers, so the integrals come out in closed form except for two
    bounded factors done by adaptive quadrature. A mesh cannot reproduce
    these numbers at small eps: the near-anchor integrals crawl to their
    limits over hundreds of decades of delta, far beyond float spacing,
    which is exactly why this oracle integrates instead of sampling.

    sigma_far is the Robin strength at the far end (it only enters through
    the weight offset there; the trial function vanishes at both ends).
    """
    if not p > 1:
        raise ParameterError(f"exponent must satisfy p > 1, got {p}")
    if not eps > 0:
        raise ParameterError("eps must be positive")
    if 2.0 * eps > r:
        raise ParameterError("the anchor zone must cover the collar: need 2*eps <= r")
    if r + 5.0 * eps >= b or 4.0 * eps >= b:
        raise ParameterError("supports overlap; shrink eps or r")
    ep = eps * p
    q = eps + 1.0 - 1.0 / p
    # near-anchor collar, exponent q: core x <= eps, linear taper to 2*eps
    grad_core = q**p * eps**ep / ep
    mass_core = eps**ep / ep
    j_p, _ = quad(lambda t: (2.0 - t) ** p * t ** (-p), 1.0, 2.0, epsrel=1e-12)
    grad_taper = eps**ep
    mass_taper = eps**ep * j_p
    # far-end collar, exponent 1: the weight carries the Robin offset there
    alpha_far = robin_offset(p, sigma_far)
    grad_far = 2.0 * eps
    if math.isinf(alpha_far):
        mass_far = 0.0
    else:
        m1, _ = quad(lambda d: d**p * (d + alpha_far) ** (-p), 0.0, eps, epsrel=1e-12)
        m2, _ = quad(lambda d: (2.0 * eps - d) ** p * (d + alpha_far) ** (-p), eps, 2.0 * eps, epsrel=1e-12)
        mass_far = m1 + m2
    return (grad_core + grad_taper + grad_far) / (mass_core + mass_taper + mass_far)


def _check_ball_stays_on_dirichlet(domain: Domain, partition: BoundaryPartition, anchor, radius: float):
    """The ball around the anchor may meet the boundary on Dirichlet pieces only."""
    if isinstance(domain, Interval):
        for pid, endpoint in ((0, domain.a), (1, domain.b)):
            if partition.is_dirichlet(pid):
                continue
            if abs(endpoint - anchor[0]) <= radius:
                raise DomainError("anchor ball reaches a non-Dirichlet endpoint")
        return
    if isinstance(domain, Ball):
        return  # single piece, already known Dirichlet
    if isinstance(domain, ConvexPolygon):
        a, b = domain.edges
        pt = anchor[None, :]
        ab = b - a
        tt = np.clip(((pt - a) * ab).sum(1) / (ab * ab).sum(1), 0.0, 1.0)
        proj = a + tt[:, None] * ab
        d = np.linalg.norm(pt - proj, axis=1)
        for pid, dist in enumerate(d):
            if not partition.is_dirichlet(pid) and dist <= radius:
                raise DomainError("anchor ball reaches a non-Dirichlet edge")
        return
    raise DomainError(f"unsupported domain {type(domain).__name__}")


def ball_upper_bound(n: int, p: float, sigma: float, R: float) -> float:
    """Upper bound for the ball from the explicit radial profile.

    C_p + sigma * alpha^{p-1} * R^{n-1} / int_0^R r^{n-1} (R+alpha-r)^{-1} dr,
    the radial integral by adaptive quadrature to relative 1e-8.
    """
    if n < 1 or int(n) != n:
        raise ParameterError(f"dimension must be a positive integer, got {n}")
    if not p > 1:
        raise ParameterError(f"exponent must satisfy p > 1, got {p}")
    if not sigma > 0:
        raise ParameterError(f"sigma must be positive, got {sigma}")
    if not R > 0:
        raise ParameterError(f"radius must be positive, got {R}")
    cp = hardy_constant(p)
    alpha = robin_offset(p, sigma)
    if math.isinf(alpha):
        return math.inf
    integral, _ = quad(lambda r: r ** (n - 1) / (R + alpha - r), 0.0, R, epsrel=1e-10, epsabs=0.0)
    return cp + sigma * alpha ** (p - 1.0) * R ** (n - 1) / integral


def sigma_limit_probe(domain: Domain, p: float, sigmas, mesh=None, config=None):
    """Solver estimates across a grid of uniform Robin strengths.

    Returns a list of (sigma, lambda_estimate) sorted by sigma. Small sigma
    sends the estimate to infinity like sigma^{1/(1-p)}; large sigma sends
    it down to the sharp constant.
    """
    from .mesh import build_interval_mesh
    from .solver import minimize_quotient

    if mesh is None:
        if not isinstance(domain, Interval):
            raise ParameterError("a mesh is required for non-interval domains")
        mesh = build_interval_mesh(domain, 2000, toward=(0, 1))
    out = []
    for sigma in sorted(float(s) for s in sigmas):
        partition = BoundaryPartition.from_sigmas({pid: sigma for pid in domain.piece_ids()})
        _, report = minimize_quotient(domain, partition, mesh, p, config)
        out.append((sigma, report.lambda_estimate))
    return out
