"""Exception types shared across the package."""


class InvalidParameterError(ValueError):
    """A numeric argument is outside its documented domain."""


class DecompositionError(ValueError):
    """Cholesky factorization failed (input not positive definite)."""


class DegeneratePriorError(ValueError):
    """Prior covariance (or one of its blocks) is singular."""


class LatticeConstructionError(RuntimeError):
    """The candidate-search lattice is not numerically positive definite."""


class NegligibleMassError(ArithmeticError):
    """Box probability mass is below the underflow floor (1e-300)."""


class DecodeFailureError(RuntimeError):
    """No usable candidate survived enumeration and weighting."""


class InfeasibleConfigurationError(RuntimeError):
    """The parameter optimizer found no feasible power allocation."""
