"""Exception types raised across normpow."""


class NormpowError(ValueError):
    """Base class for every error raised by this package."""


class DomainError(NormpowError):
    pass


class NotSymmetric(NormpowError):
    pass


class NotPositiveDefinite(NormpowError):
    """Raised when a metric matrix has a non-positive eigenvalue.

    ``eigenvalue`` and ``direction`` describe the offending eigenpair.
    """

    def __init__(self, message, eigenvalue=None, direction=None):
        super().__init__(message)
        self.eigenvalue = eigenvalue
        self.direction = direction


class NonUnitDirection(NormpowError):
    pass


class UndefinedAtOrigin(NormpowError):
    pass


class ArgumentCountMismatch(NormpowError):
    pass


class StencilHitsOrigin(NormpowError):
    pass


class MonotonicityViolation(NormpowError):
    """The 2-D grid found a larger quotient than the 1-D reduction.

    The reduction to ``tau_2 = 1`` is a theorem, so this indicates a bug.
    """
