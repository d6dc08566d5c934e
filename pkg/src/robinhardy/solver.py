"""Quotient minimization: preconditioned projected descent with backtracking.

The quotient is scale-invariant, so each accepted step is renormalized to
unit weighted norm. The search direction is the gradient smoothed by one
solve with a symmetric positive definite proxy operator (stiffness plus
weighted mass plus Robin terms, Dirichlet rows pinned); on meshes graded
twelve decades into a boundary layer a raw gradient step moves the small
cells at a glacial pace, while the operator solve equilibrates them.

Estimates produced here are quotients of explicit admissible fields, hence
upper bounds for the discrete minimum; they approach the continuum infimum
only under mesh refinement, and for configurations with a Dirichlet piece
no continuum minimizer exists at all, so do not read the convergence flag
as more than stagnation of the discrete iteration.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field

import numpy as np
from scipy.linalg import cho_solve_banded, cholesky_banded
from scipy.sparse import coo_matrix, identity
from scipy.sparse.linalg import splu

from .errors import DegenerateFieldError, ParameterError, SolverError
from .functional import Field, QuotientForm
from .geometry import (
    Ball,
    BoundaryPartition,
    ConvexPolygon,
    Domain,
    Interval,
    inradius,
    project_points,
)
from .mesh import Mesh1D, prolong_values, refine_mesh
from .weights import hardy_constant

CERT_SLACK = 1e-6


@dataclass
class SolverConfig:
    max_iter: int = 400
    rel_tol: float = 1e-9
    init: str = "auto"  # auto | delta_power | ones | custom (pass init_values)
    init_values: np.ndarray | None = None
    step0: float = 1.0
    shrink: float = 0.5
    sufficient_decrease: float = 1e-4
    preconditioner: str = "auto"  # auto | operator | jacobi | none
    window: int = 10

    def __post_init__(self):
        if not self.rel_tol > 0:
            raise ParameterError("rel_tol must be positive")
        if not (0.0 < self.shrink < 1.0):
            raise ParameterError("shrink factor must lie in (0, 1)")
        if self.max_iter < 1:
            raise ParameterError("max_iter must be at least 1")
        if self.init not in ("auto", "delta_power", "ones", "custom"):
            raise ParameterError(f"unknown init mode {self.init!r}")
        if self.init == "custom" and self.init_values is None:
            raise ParameterError("custom init requires init_values")


@dataclass
class QuotientReport:
    lambda_estimate: float
    iterations: int
    history: list
    analytic_lower: float | None
    analytic_upper: float | None
    converged: bool
    mesh_summary: dict
    violation: bool = False
    notes: list = dc_field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "lambda_estimate": self.lambda_estimate,
            "iterations": self.iterations,
            "history": [float(q) for q in self.history],
            "analytic_lower": self.analytic_lower,
            "analytic_upper": self.analytic_upper,
            "converged": self.converged,
            "mesh_summary": self.mesh_summary,
            "violation": self.violation,
            "notes": list(self.notes),
        }


# -- preconditioners ---------------------------------------------------------


def _quadratic_proxy_1d(form: QuotientForm):
    n1 = form.pinned.size
    diag = np.zeros(n1)
    off = np.zeros(n1 - 1)
    k = form.grad_measure * form.inv_h**2
    np.add.at(diag, form.i0, k)
    np.add.at(diag, form.i1, k)
    off -= k
    qw = form.mass_qw
    diag[:-1] += qw @ (form.phi0 * form.phi0)
    diag[1:] += qw @ (form.phi1 * form.phi1)
    off += qw @ (form.phi0 * form.phi1)
    for node, coef in zip(form.robin_nodes, form.robin_coefs):
        diag[node] += coef
    pin = form.pinned
    diag[pin] = 1.0
    off[pin[:-1] | pin[1:]] = 0.0
    ab = np.zeros((2, n1))
    ab[0, 1:] = off
    ab[1] = diag
    return ab, diag


def _quadratic_proxy_2d(form: QuotientForm):
    t = form.tri
    nv = form.pinned.size
    rows, cols, vals = [], [], []
    for a in range(3):
        for b in range(3):
            s = form.grad_measure * (form.gx[:, a] * form.gx[:, b] + form.gy[:, a] * form.gy[:, b])
            m = form.mass_qw @ (form.bary[:, a] * form.bary[:, b])
            rows.append(t[:, a])
            cols.append(t[:, b])
            vals.append(s + m)
    if form.bseg is not None:
        b0, b1, qw = form.bseg
        phis = [(b0, b0, form.phi0 * form.phi0), (b1, b1, form.phi1 * form.phi1), (b0, b1, form.phi0 * form.phi1), (b1, b0, form.phi0 * form.phi1)]
        for r, c, ph in phis:
            rows.append(r)
            cols.append(c)
            vals.append(qw @ ph)
    rows = np.concatenate(rows)
    cols = np.concatenate(cols)
    vals = np.concatenate(vals)
    mat = coo_matrix((vals, (rows, cols)), shape=(nv, nv)).tocsr()
    pin = np.flatnonzero(form.pinned)
    if pin.size:
        mat = mat.tolil()
        mat[pin, :] = 0.0
        mat[:, pin] = 0.0
        mat[pin, pin] = 1.0
        mat = mat.tocsr()
    return mat


def _make_preconditioner(form: QuotientForm, mode: str):
    if mode == "none":
        return lambda g: g
    if form.tri is None:
        ab, diag = _quadratic_proxy_1d(form)
        if mode == "jacobi":
            return lambda g: g / diag
        # factor once; a singular proxy (e.g. pure-Neumann) gets an
        # escalating ridge until the Cholesky goes through
        ridge = 0.0
        for _ in range(12):
            try:
                fac = cholesky_banded(_with_ridge_banded(ab, ridge), lower=False)
                return lambda g: cho_solve_banded((fac, False), g)
            except np.linalg.LinAlgError:
                ridge = max(ridge * 100.0, 1e-14 * diag.max())
            except Exception:
                ridge = max(ridge * 100.0, 1e-14 * diag.max())
        return lambda g: g / diag
    mat = _quadratic_proxy_2d(form)
    if mode == "jacobi":
        diag = mat.diagonal()
        return lambda g: g / diag
    mat += identity(mat.shape[0], format="csr") * (1e-14 * mat.diagonal().max())
    lu = splu(mat.tocsc())
    return lambda g: lu.solve(g)


def _with_ridge_banded(ab, ridge):
    if ridge == 0.0:
        return ab
    out = ab.copy()
    out[1] = out[1] + ridge
    return out


# -- initialization ----------------------------------------------------------


def _node_boundary_distance(domain: Domain, mesh) -> np.ndarray:
    if isinstance(mesh, Mesh1D):
        if isinstance(domain, Interval):
            return np.minimum(mesh.nodes - domain.a, domain.b - mesh.nodes)
        return domain.radius - mesh.nodes
    delta, _ = project_points(domain, mesh.vertices)
    return delta


def initial_field(domain: Domain, form: QuotientForm, config: SolverConfig) -> np.ndarray:
    mode = config.init
    if mode == "auto":
        # the boundary-layer profile is the right shape only when a
        # Dirichlet piece forces decay; all-Robin minimizers stay bounded
        # away from zero, where a flat start is much closer
        mode = "delta_power" if form.pinned.any() else "ones"
    if mode == "custom":
        u = np.asarray(config.init_values, dtype=float).copy()
        if u.shape != form.pinned.shape:
            raise ParameterError("init_values shape does not match the mesh")
    elif mode == "ones":
        u = np.ones(form.pinned.size)
    else:
        delta = np.maximum(_node_boundary_distance(domain, form.mesh), 0.0)
        u = delta ** ((form.p - 1.0) / form.p)
    u[form.pinned] = 0.0
    return u


# -- certificates ------------------------------------------------------------


def _attach_certificates(domain: Domain, partition: BoundaryPartition, p: float):
    """Analytic lower/upper bounds for configurations the theory covers."""
    from . import oracles

    lower = None
    upper = None
    notes = []
    if partition.has_dirichlet:
        lower = hardy_constant(p)
        notes.append("lower bound: sharp Hardy constant for convex domains with a Dirichlet piece")
    elif partition.sigma_min > 0:
        try:
            r_in = inradius(domain)
        except Exception:
            r_in = None
        if r_in is not None:
            lower = oracles.robin_lower_bound(p, r_in, partition.sigma_max)
            notes.append("lower bound: non-sharp all-Robin estimate from the in-radius")
    if isinstance(domain, ConvexPolygon) and lower is not None:
        notes.append(
            "polygon boundary is piecewise linear, not twice differentiable;"
            " the smooth-domain bound applies by convex approximation"
        )
    if isinstance(domain, Ball) and not partition.has_dirichlet and partition.sigma_min > 0:
        sig = partition.sigma_of(0)
        upper = oracles.ball_upper_bound(domain.dim, p, sig, domain.radius)
        notes.append("upper bound: explicit radial trial profile on the ball")
    return lower, upper, notes


# -- the descent itself ------------------------------------------------------


def _exact_step_p2(form: QuotientForm, u, d, num_u, den_u):
    """Closed-form line search for p = 2.

    Numerator and denominator are quadratic forms, so along u - t d both
    are quadratics in t recoverable from three evaluations; the quotient's
    stationary points solve a scalar quadratic.
    """
    num_d = form.numerator(d)
    den_d = form.weighted_norm_pp(d)
    w = u - d
    num_c = num_u + num_d - form.numerator(w)
    den_c = den_u + den_d - form.weighted_norm_pp(w)
    a2 = num_c * den_d - num_d * den_c
    a1 = 2.0 * (num_d * den_u - num_u * den_d)
    a0 = num_u * den_c - num_c * den_u
    if a2 == 0.0:
        if a1 == 0.0:
            return None
        cands = [-a0 / a1]
    else:
        disc = a1 * a1 - 4.0 * a2 * a0
        if disc < 0.0:
            return None
        root = math.sqrt(disc)
        cands = [(-a1 - root) / (2.0 * a2), (-a1 + root) / (2.0 * a2)]
    best = None
    best_q = num_u / den_u
    for t in cands:
        if not (t > 0.0 and math.isfinite(t)):
            continue
        den_t = den_u - t * den_c + t * t * den_d
        if not den_t > 0.0:
            continue
        q_t = (num_u - t * num_c + t * t * num_d) / den_t
        if q_t < best_q:
            best, best_q = t, q_t
    return best


def _bracketed_step(form: QuotientForm, u, d, q0, t0):
    """Doubling bracket plus golden-section refinement of q(u - t d)."""

    def val(t):
        try:
            return form.rayleigh(u - t * d)
        except DegenerateFieldError:
            return math.inf

    t = t0
    q_t = val(t)
    while not q_t < q0 and t > 1e-22:
        t *= 0.25
        q_t = val(t)
    if not q_t < q0:
        return None
    hi = t
    q_hi = q_t
    for _ in range(60):
        q_next = val(2.0 * hi)
        if not q_next < q_hi:
            break
        hi *= 2.0
        q_hi = q_next
    lo, mid = 0.0, hi
    hi2 = 2.0 * hi
    phi = 0.6180339887498949
    a, b = lo, hi2
    x1 = b - phi * (b - a)
    x2 = a + phi * (b - a)
    f1, f2 = val(x1), val(x2)
    for _ in range(40):
        if f1 <= f2:
            b, x2, f2 = x2, x1, f1
            x1 = b - phi * (b - a)
            f1 = val(x1)
        else:
            a, x1, f1 = x1, x2, f2
            x2 = a + phi * (b - a)
            f2 = val(x2)
        if b - a <= 1e-3 * max(mid, b):
            break
    t_best = x1 if f1 <= f2 else x2
    return t_best if val(t_best) < q0 else mid


def descend(form: QuotientForm, u0: np.ndarray, config: SolverConfig):
    """Monotone quotient descent; returns (values, history, converged).

    Each iteration smooths the gradient through the proxy operator, picks
    a step by line search (closed form for p = 2, bracketed scalar search
    otherwise), and falls back to plain backtracking whenever the proposed
    step fails the sufficient-decrease test, so the history can only move
    down.
    """
    u = form.normalize(np.where(form.pinned, 0.0, u0))
    prec = _make_preconditioner(form, "operator" if config.preconditioner == "auto" else config.preconditioner)
    q, g = form.rayleigh_gradient(u)
    hist = [q]
    t = config.step0
    converged = False
    for _ in range(config.max_iter):
        d = prec(g)
        d = np.where(form.pinned, 0.0, d)
        gd = float(np.dot(g, d))
        if not math.isfinite(gd):
            raise SolverError("preconditioned direction is not finite")
        if gd <= 0.0:
            d = np.where(form.pinned, 0.0, g)
            gd = float(np.dot(g, d))
            if gd == 0.0:
                converged = True
                break
        # u is renormalized after every step, so its weighted norm is 1
        if form.p == 2.0:
            proposal = _exact_step_p2(form, u, d, q, 1.0)
        else:
            proposal = _bracketed_step(form, u, d, q, t)
        accepted = False
        if proposal is not None:
            v = u - proposal * d
            qv = form.rayleigh(v)
            if math.isnan(qv):
                raise SolverError("line search produced NaN in the quotient")
            if qv < q:
                t = proposal
                accepted = True
        if not accepted:
            while t > 1e-22:
                v = u - t * d
                try:
                    qv = form.rayleigh(v)
                except DegenerateFieldError:
                    t *= config.shrink
                    continue
                if math.isnan(qv):
                    raise SolverError("line search produced NaN in the quotient")
                if qv <= q - config.sufficient_decrease * t * gd:
                    accepted = True
                    break
                t *= config.shrink
        if not accepted:
            converged = True
            break
        u = form.normalize(v)
        q, g = form.rayleigh_gradient(u)
        hist.append(q)
        w = config.window
        if len(hist) > w and hist[-w - 1] - hist[-1] <= config.rel_tol * abs(hist[-1]):
            converged = True
            break
    return u, hist, converged


def minimize_quotient(
    domain: Domain,
    partition: BoundaryPartition,
    mesh,
    p: float,
    config: SolverConfig | None = None,
    form: QuotientForm | None = None,
) -> tuple[Field, QuotientReport]:
    """Minimize the quotient over nodal fields; returns (field, report).

    ``form`` may be supplied prebuilt (for instrumentation or fault
    injection); certificates are always derived from the clean
    (domain, partition, p) data, so a tampered form trips the violation
    flag instead of silently shifting the goalposts.
    """
    config = config or SolverConfig()
    if form is None:
        form = QuotientForm(domain, partition, mesh, p)
    if form.pinned.all():
        raise SolverError("every node is pinned; no admissible fields")
    u0 = initial_field(domain, form, config)
    u, hist, converged = descend(form, u0, config)
    lower, upper, notes = _attach_certificates(domain, partition, p)
    estimate = hist[-1]
    violation = lower is not None and estimate < lower - CERT_SLACK
    if violation:
        notes = notes + [
            "estimate fell below the analytic lower bound: quadrature, weight, or mesh fault suspected"
        ]
    report = QuotientReport(
        lambda_estimate=float(estimate),
        iterations=len(hist) - 1,
        history=[float(x) for x in hist],
        analytic_lower=lower,
        analytic_upper=upper,
        converged=converged,
        mesh_summary=mesh.summary(),
        violation=bool(violation),
        notes=notes,
    )
    return form.field(u), report


def minimizing_sequence(
    domain: Domain,
    partition: BoundaryPartition,
    p: float,
    levels: int,
    base_mesh=None,
    config: SolverConfig | None = None,
):
    """Solve on nested refinements, warm-starting each level from the last.

    Returns a list of (form, field, report) triples, one per level. Trial
    spaces nest, the warm start reproduces the previous minimizer exactly,
    and descent only improves it, so the reported quotients never increase.
    """
    if levels < 2:
        raise ParameterError("a minimizing sequence needs at least 2 levels")
    config = config or SolverConfig()
    if base_mesh is None:
        if isinstance(domain, Interval):
            from .mesh import build_interval_mesh

            base_mesh = build_interval_mesh(domain, 24)
        else:
            raise ParameterError("base_mesh is required for non-interval domains")
    out = []
    mesh = base_mesh
    prev_mesh = None
    prev_values = None
    for _ in range(levels):
        if prev_values is not None:
            mesh = refine_mesh(prev_mesh)
            cfg = SolverConfig(
                max_iter=config.max_iter,
                rel_tol=config.rel_tol,
                init="custom",
                init_values=prolong_values(prev_mesh, mesh, prev_values),
                step0=config.step0,
                shrink=config.shrink,
                sufficient_decrease=config.sufficient_decrease,
                preconditioner=config.preconditioner,
                window=config.window,
            )
        else:
            cfg = config
        form = QuotientForm(domain, partition, mesh, p)
        field, report = minimize_quotient(domain, partition, mesh, p, cfg, form=form)
        values = form.normalize(field.values)
        out.append((form, form.field(values), report))
        prev_mesh, prev_values = mesh, values
    return out


def local_gradient_energy(form: QuotientForm, field, region) -> float:
    """Integral of |grad u|^p over the cells whose centroid satisfies region."""
    cells = form.cell_gradient_energies(field)
    cent = form.cell_centroids()
    keep = np.fromiter((bool(region(c)) for c in cent), dtype=bool, count=len(cent))
    return float(cells[keep].sum())
