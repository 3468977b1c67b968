"""Exception types shared across the package.

The CLI maps these onto exit codes, so keep the hierarchy flat.
"""


class DomainError(ValueError):
    """An argument lies outside the domain of the operation."""


class PreconditionError(ValueError):
    """A documented precondition on the inputs does not hold."""


class ResourceLimitError(RuntimeError):
    """The request would exceed a configured size or memory guard."""


class ConsistencyError(RuntimeError):
    """Internal consistency check failed (e.g. a malformed spectrum)."""


class NumericalError(ArithmeticError):
    """A non-finite value appeared where a finite one is required."""

    def __init__(self, message: str, coordinate: int | None = None):
        super().__init__(message)
        self.coordinate = coordinate
