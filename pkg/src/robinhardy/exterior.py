"""Hardy quotients outside a ball, reduced to radial profiles.

Work happens in the log variable s = log(r/R): both the gradient term and
the |x|^{-p}-weighted mass term carry the same measure e^{(n-p)s} ds up to
one common power of R, the sphere-area factor cancels in the quotient, and
a uniform s-grid puts thousands of decades of radius within reach.

Regimes split at p = n. For n > p the classical constant ((n-p)/p)^p rules
compactly supported profiles; for p > n a Robin term at the inner sphere
buys the constant min{((p-n)/p)^p, R^p sigma^{p/(p-1)}}; at p = n the
log-cutoff family drives the quotient to zero, so no constant survives.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._quadrature import SEG_W, SEG_XI
from .errors import DegenerateFieldError, InfeasibleProfileError, OutOfRegimeError, ParameterError
from .functional import QuotientForm
from .mesh import RadialLogMesh


@dataclass(frozen=True)
class ExteriorProblem:
    n: int
    p: float
    R: float
    sigma: float
    rho_max: float

    def __post_init__(self):
        if self.n < 1 or int(self.n) != self.n:
            raise ParameterError(f"dimension must be a positive integer, got {self.n}")
        if not self.p > 1:
            raise ParameterError(f"exponent must satisfy p > 1, got {self.p}")
        if not self.R > 0:
            raise ParameterError(f"radius must be positive, got {self.R}")
        if not self.sigma >= 0:
            raise ParameterError(f"sigma must be >= 0, got {self.sigma}")
        if not self.rho_max > self.R:
            raise ParameterError("truncation radius must exceed the ball radius")

    @property
    def s_max(self) -> float:
        return math.log(self.rho_max / self.R)

    @property
    def gamma(self) -> float | None:
        """Decay rate of the sharp radial profile; defined for p > n only."""
        if self.p <= self.n:
            return None
        return ((self.p - self.n) / self.p) * self.sigma ** (1.0 / (self.p - 1.0))


def classical_exterior_constant(n: int, p: float) -> float:
    """Sharp constant ((n-p)/p)^p of the exterior inequality for n > p."""
    if not p > 1:
        raise ParameterError(f"exponent must satisfy p > 1, got {p}")
    if not n > p:
        raise OutOfRegimeError(f"the unweighted exterior inequality needs n > p, got n={n}, p={p}")
    return ((n - p) / p) ** p


def robin_exterior_constant(n: int, p: float, sigma: float, R: float) -> float:
    """Constant min{((p-n)/p)^p, R^p sigma^{p/(p-1)}} for p > n with Robin term."""
    if not p > 1:
        raise ParameterError(f"exponent must satisfy p > 1, got {p}")
    if not p > n:
        raise OutOfRegimeError(f"the Robin exterior constant needs p > n, got n={n}, p={p}")
    if not sigma > 0:
        raise ParameterError(f"sigma must be positive, got {sigma}")
    if not R > 0:
        raise ParameterError(f"radius must be positive, got {R}")
    return min(((p - n) / p) ** p, R**p * sigma ** (p / (p - 1.0)))


class RadialQuotientForm(QuotientForm):
    """Quotient evaluator over radial profiles in the log variable.

    Presents the same kernel-array surface as the interval form, so the
    descent loop and its banded preconditioner apply verbatim. The common
    factor R^{n-p} and the sphere area are dropped from numerator and
    denominator alike; the Robin coefficient then reads sigma * R^{p-1}.
    For n > p the outer node is pinned (compact support); otherwise it is
    free.
    """

    def __init__(self, problem: ExteriorProblem, mesh: RadialLogMesh):
        if abs(mesh.s_nodes[-1] - problem.s_max) > 1e-9:
            raise ParameterError("mesh truncation disagrees with the problem's rho_max")
        self.problem = problem
        self.domain = None
        self.partition = None
        self.mesh = mesh
        self.p = float(problem.p)
        s = mesh.s_nodes
        h = np.diff(s)
        n1 = len(s)
        a = problem.n - problem.p
        self.i0 = np.arange(n1 - 1, dtype=np.intp)
        self.i1 = self.i0 + 1
        self.inv_h = 1.0 / h
        if abs(a) < 1e-14:
            self.grad_measure = h.copy()
        else:
            self.grad_measure = (np.exp(a * s[1:]) - np.exp(a * s[:-1])) / a
        sq = s[:-1, None] + h[:, None] * SEG_XI[None, :]
        self.mass_qw = np.exp(a * sq) * h[:, None] * SEG_W[None, :]
        self.plain_qw = h[:, None] * SEG_W[None, :]
        self.phi0 = 1.0 - SEG_XI
        self.phi1 = SEG_XI.copy()
        self.robin_nodes = []
        self.robin_coefs = []
        if problem.sigma > 0:
            self.robin_nodes.append(0)
            self.robin_coefs.append(problem.sigma * problem.R ** (problem.p - 1.0))
        pinned = np.zeros(n1, dtype=bool)
        if problem.n > problem.p:
            pinned[-1] = True
        self.pinned = pinned
        self.bseg = None
        self.tri = None
        self.weight = None
        self._centroids = 0.5 * (s[:-1] + s[1:])


def radial_quotient(problem: ExteriorProblem, mesh_or_s, values) -> float:
    """Quotient of one radial profile, piecewise linear in s = log(r/R).

    (int |f'|^p r^{n-1} dr + sigma R^{n-1} |f(R)|^p) over
    int |f|^p r^{n-1-p} dr, truncated at rho_max. Compact support is
    demanded when n > p, matching the trial class of that regime.
    """
    if isinstance(mesh_or_s, RadialLogMesh):
        mesh = mesh_or_s
    else:
        mesh = RadialLogMesh(np.asarray(mesh_or_s, dtype=float))
    values = np.asarray(values, dtype=float)
    if problem.n > problem.p and values[-1] != 0.0:
        raise InfeasibleProfileError("n > p requires compactly supported profiles (zero at rho_max)")
    form = RadialQuotientForm(problem, mesh)
    num = form.gradient_energy(values) + form.boundary_energy(values)
    den = form.weighted_norm_pp(values)
    if not den > 0:
        raise DegenerateFieldError("the weighted norm of the profile vanishes")
    return float(num / den)


def uk_quotient(k_log: float, R: float, sigma: float, n: int) -> float:
    """Closed-form quotient of the log-cutoff family at the critical p = n.

    The profile (1 - log(r/R)/k)_+ gives
    (k^{1-n} + sigma R^{n-1}) * (n+1) / (k * R^{n-n}) after the s-integrals;
    it vanishes as k grows, which is exactly the failure of any positive
    constant at p = n.
    """
    if not k_log > 0:
        raise ParameterError(f"k_log must be positive, got {k_log}")
    if n < 1 or int(n) != n:
        raise ParameterError(f"dimension must be a positive integer, got {n}")
    if not R > 0:
        raise ParameterError(f"radius must be positive, got {R}")
    if not sigma >= 0:
        raise ParameterError(f"sigma must be >= 0, got {sigma}")
    num = k_log ** (1.0 - n) + sigma * R ** (n - 1.0)
    den = k_log / (n + 1.0)
    return float(num / den)


def sample_uk(problem: ExteriorProblem, mesh: RadialLogMesh, k_log: float) -> np.ndarray:
    """Nodal samples of the log-cutoff profile on a log-radial mesh."""
    return np.maximum(1.0 - mesh.s_nodes / k_log, 0.0)


def brute_force_radial_min(problem: ExteriorProblem, mesh: RadialLogMesh | None = None, config=None):
    """Descend the radial quotient; returns (values, QuotientReport).

    The report's analytic_lower is the regime's certificate: the Robin
    constant for p > n, the classical constant for n > p, and none at
    p = n (where the infimum is genuinely zero). Radial minima are upper
    bounds for the unrestricted infimum; for p > n the reduction to radial
    profiles is a modeling choice, not a proved equality, so the gap to the
    certificate is reported without interpretation.
    """
    from .solver import QuotientReport, SolverConfig, descend

    config = config or SolverConfig()
    if mesh is None:
        mesh = RadialLogMesh(np.linspace(0.0, problem.s_max, 2001))
    form = RadialQuotientForm(problem, mesh)
    s = mesh.s_nodes
    S = s[-1]
    if config.init == "custom":
        u0 = np.asarray(config.init_values, dtype=float).copy()
    elif config.init == "ones":
        u0 = np.ones(len(s))
    elif problem.n > problem.p:
        u0 = np.exp(-((problem.n - problem.p) / problem.p) * s) * (1.0 - s / S)
    elif problem.p > problem.n:
        u0 = np.exp(-(problem.gamma or 0.0) * s)
    else:
        u0 = 1.0 - s / S
    u, hist, converged = descend(form, u0, config)

    lower = None
    notes = []
    if problem.p > problem.n and problem.sigma > 0:
        lower = robin_exterior_constant(problem.n, problem.p, problem.sigma, problem.R)
        notes.append("lower bound: exterior Robin constant; radial infimum reported as an upper bound only")
    elif problem.n > problem.p:
        lower = classical_exterior_constant(problem.n, problem.p)
        notes.append("lower bound: classical exterior constant over compactly supported profiles")
    else:
        notes.append("p = n: no positive constant exists; the log-cutoff family drives the quotient to zero")
    estimate = float(hist[-1])
    violation = lower is not None and estimate < lower - 1e-6
    if violation:
        notes.append("estimate fell below the analytic lower bound: quadrature or mesh fault suspected")
    report = QuotientReport(
        lambda_estimate=estimate,
        iterations=len(hist) - 1,
        history=[float(x) for x in hist],
        analytic_lower=lower,
        analytic_upper=None,
        converged=converged,
        mesh_summary=mesh.summary(),
        violation=bool(violation),
        notes=notes,
    )
    return u, report
