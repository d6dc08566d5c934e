"""Numerical bounds and certificates for weighted Hardy quotients.

The package estimates the optimal constant of Hardy-type inequalities with
Robin, Dirichlet, or mixed boundary conditions on convex domains (interval,
convex polygon, ball) and on the exterior of a ball, and cross-checks every
estimate against the closed-form bounds that are known for each regime.
"""

from ._kernels import BACKEND
from .errors import (
    ConfigError,
    DegenerateFieldError,
    DomainError,
    InfeasibleProfileError,
    MeshError,
    OutOfRegimeError,
    ParameterError,
    PartitionError,
    RobinHardyError,
    SolverError,
)
from .exterior import (
    ExteriorProblem,
    RadialQuotientForm,
    brute_force_radial_min,
    classical_exterior_constant,
    radial_quotient,
    robin_exterior_constant,
    sample_uk,
    uk_quotient,
)
from .functional import Field, QuotientForm
from .geometry import (
    DIRICHLET,
    Ball,
    BoundaryPartition,
    BoundaryPiece,
    ConvexPolygon,
    ExteriorBall,
    Interval,
    boundary_projection,
    distance_to_boundary,
    inradius,
    nearest_count,
    piece_measure,
    sphere_area,
)
from .mesh import (
    Mesh1D,
    RadialLogMesh,
    TriMesh,
    build_interval_mesh,
    build_polygon_mesh,
    build_radial_mesh,
    min_angle_degrees,
    prolong_values,
    refine_mesh,
)
from .oracles import (
    Profile1D,
    ball_upper_bound,
    boundary_layer_quotient,
    improved_hardy_rhs,
    profile_inequality_sides,
    robin_lower_bound,
    sigma_limit_probe,
    u_eps_field,
)
from .solver import (
    QuotientReport,
    SolverConfig,
    local_gradient_energy,
    minimize_quotient,
    minimizing_sequence,
)
from .weights import WeightCache, hardy_constant, robin_offset, weight_at

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "__version__",
    "RobinHardyError",
    "DomainError",
    "MeshError",
    "PartitionError",
    "ParameterError",
    "DegenerateFieldError",
    "SolverError",
    "OutOfRegimeError",
    "InfeasibleProfileError",
    "ConfigError",
    "Interval",
    "ConvexPolygon",
    "Ball",
    "ExteriorBall",
    "BoundaryPiece",
    "BoundaryPartition",
    "DIRICHLET",
    "distance_to_boundary",
    "boundary_projection",
    "nearest_count",
    "inradius",
    "piece_measure",
    "sphere_area",
    "hardy_constant",
    "robin_offset",
    "weight_at",
    "WeightCache",
    "Mesh1D",
    "RadialLogMesh",
    "TriMesh",
    "build_interval_mesh",
    "build_radial_mesh",
    "build_polygon_mesh",
    "refine_mesh",
    "prolong_values",
    "min_angle_degrees",
    "Field",
    "QuotientForm",
    "SolverConfig",
    "QuotientReport",
    "minimize_quotient",
    "minimizing_sequence",
    "local_gradient_energy",
    "Profile1D",
    "profile_inequality_sides",
    "robin_lower_bound",
    "improved_hardy_rhs",
    "boundary_layer_quotient",
    "u_eps_field",
    "ball_upper_bound",
    "sigma_limit_probe",
    "ExteriorProblem",
    "RadialQuotientForm",
    "classical_exterior_constant",
    "robin_exterior_constant",
    "radial_quotient",
    "uk_quotient",
    "sample_uk",
    "brute_force_radial_min",
]
