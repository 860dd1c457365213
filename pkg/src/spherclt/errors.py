"""Exception hierarchy shared by every module."""


class SpherCLTError(Exception):
    """Base class for all package errors."""


class InvalidInputError(SpherCLTError, ValueError):
    pass


class DegenerateInputError(InvalidInputError):
    """Raised for inputs that have no well-defined direction (zero vectors)."""


class DomainError(SpherCLTError, ValueError):
    """Argument lies on a pole or outside the region a routine supports."""


class ConvergenceError(SpherCLTError, ArithmeticError):
    """An iterative routine ran out of budget.

    The best available estimate is kept on ``estimate`` so callers can still
    inspect it.
    """

    def __init__(self, message, estimate=None, error_estimate=None):
        super().__init__(message)
        self.estimate = estimate
        self.error_estimate = error_estimate


class CrossCheckError(SpherCLTError, ArithmeticError):
    """Two independent evaluations of the same quantity disagree."""


class StepFailureError(SpherCLTError, RuntimeError):
    """A discretization step produced a point too close to the origin."""
