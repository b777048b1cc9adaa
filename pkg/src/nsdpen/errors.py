"""Exception types shared across the toolkit."""


class InvalidInputError(ValueError):
    """Raised on malformed arguments: wrong shapes, non-finite data, bad parameter ranges."""


class UnknownProblemError(LookupError):
    """Raised when a problem name is not present in the registry."""


class StartNotFeasibleError(RuntimeError):
    """Raised when a solve is started from a point that violates the constraints."""
