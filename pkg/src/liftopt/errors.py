"""Exception types shared across the package."""


class DimensionMismatchError(ValueError):
    """A vector's dimension does not match the object it is used with."""


class DomainError(ValueError):
    """A cost function was evaluated outside its domain."""


class SubgradientUnavailableError(DomainError):
    """No finite subgradient exists at the requested point."""


class ConfigurationError(ValueError):
    """Solver configuration is invalid or inconsistent with the problem."""


class NumericalError(RuntimeError):
    """An inner numerical routine failed to converge.

    Solvers attach the partial iteration trace to the ``trace`` attribute
    before re-raising.
    """

    def __init__(self, message, trace=None):
        super().__init__(message)
        self.trace = trace


class UnsupportedOperationError(ValueError):
    """The requested operation is not defined for the given inputs."""


class SpecFileError(ValueError):
    """A problem spec file is malformed; the message names the offending field."""
