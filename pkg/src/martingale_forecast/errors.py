"""Exception types shared across the package."""


class DomainError(ValueError):
    """An argument lies outside the domain of the operation."""


class PreconditionError(ValueError):
    """The inputs are well-formed but an operation's precondition does not hold."""


class AlignmentError(ValueError):
    """Two series that must share timestamps do not."""


class ConvergenceError(ArithmeticError):
    """Numerical routine did not converge; ``best`` holds the last estimate."""

    def __init__(self, message, best=None, abs_error=None):
        super().__init__(message)
        self.best = best
        self.abs_error = abs_error
