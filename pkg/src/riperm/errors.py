class RIError(Exception):
    """Base class for errors raised by riperm."""


class DomainError(RIError, ValueError):
    """An argument lies outside the domain of the operation."""


class ValidationError(RIError, ValueError):
    """An object failed a structural check (quasi-concavity, normalization, ...)."""


class UnsupportedError(RIError, NotImplementedError):
    """The requested family or mode is not supported by this operation."""


class EnumerationLimitError(RIError, ValueError):
    """Exhaustive enumeration was requested above the configured size threshold."""


class ConvergenceError(RIError, RuntimeError):
    """An iterative solver hit its iteration cap."""
