"""Exception types shared across the package."""


class RobinHardyError(Exception):
    """Base class for all package-specific failures."""


class DomainError(RobinHardyError):
    """Invalid domain description or point outside the domain closure."""


class MeshError(RobinHardyError):
    """Invalid mesh parameters or a degenerate generated mesh."""


class PartitionError(RobinHardyError):
    """Boundary partition does not cover the boundary or has bad sigma."""


class ParameterError(RobinHardyError):
    """Scalar parameter out of its admissible range (p, sigma, tolerances)."""


class DegenerateFieldError(RobinHardyError):
    """A quotient was requested for a field with zero weighted norm."""


class SolverError(RobinHardyError):
    """Line search produced NaN, or no unpinned degrees of freedom exist."""


class OutOfRegimeError(RobinHardyError):
    """An exterior-domain constant was requested outside its (n, p) regime."""


class InfeasibleProfileError(RobinHardyError):
    """A 1D test profile violates the constraints of its inequality."""


class ConfigError(RobinHardyError):
    """CLI configuration failed schema validation or is inconsistent."""
