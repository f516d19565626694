"""Exception types shared across the package."""


class InvalidArgumentError(ValueError):
    """Raised when an operation receives non-finite or out-of-contract input."""


class ConsistencyError(RuntimeError):
    """Raised when two independent computations of the same quantity disagree."""


class ConvergenceError(RuntimeError):
    """Raised when an iterative solve fails; carries the last iterate if any."""

    def __init__(self, message, last_state=None):
        super().__init__(message)
        self.last_state = last_state
