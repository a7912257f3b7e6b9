"""Exception hierarchy shared by all modules."""


class PseudoellError(Exception):
    """Base class for all errors raised by this package."""


class ValidationError(PseudoellError):
    """Invalid input: bad shapes, out-of-range parameters, malformed files."""


class ConfigurationSizeError(ValidationError):
    """Configuration vector length does not match the chain."""


class WeightMatrixError(ValidationError):
    """Joint-space weight matrix is not symmetric positive semidefinite."""


class NumericalError(PseudoellError):
    """A computation is mathematically undefined or failed to converge."""


class SingularSensitivityError(NumericalError):
    """Sensitivity partials requested on a rank-deficient ellipsoid."""


class DegenerateDirectionError(NumericalError):
    """The queried direction carries no projection (pseudo radius is zero)."""


class PathInfeasibleError(NumericalError):
    """Differential IK integration diverged along the requested path."""
