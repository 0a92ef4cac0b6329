"""Exception hierarchy shared across the package."""


class PMeanFairError(Exception):
    """Base class for all package-specific errors."""


class InvalidInstance(PMeanFairError):
    """Instance matrix violates a structural invariant."""


class DimensionError(PMeanFairError):
    """Mismatched shapes or an index out of range."""


class DomainError(PMeanFairError):
    """Numeric argument outside the mathematical domain."""


class ParamError(PMeanFairError):
    """Parameter violates a stated constraint."""


class ScaleError(PMeanFairError):
    """Problem too large for an exhaustive procedure."""


class UnsupportedRegime(PMeanFairError):
    """(kind, p) combination outside the convex regimes."""


class ConvergenceError(PMeanFairError):
    """Iteration budget exhausted before reaching tolerance.

    Carries the best iterate found so far in ``best`` and its
    residual in ``residual``.
    """

    def __init__(self, message, best=None, residual=None):
        super().__init__(message)
        self.best = best
        self.residual = residual


class DegenerateOptimum(PMeanFairError):
    """An agent ended with zero utility where positivity was required."""


class PreconditionError(PMeanFairError):
    """Operation invoked on inputs that fail its precondition."""


class NumericalError(PMeanFairError):
    """Internal numerical failure that indicates a bug, not bad input."""
