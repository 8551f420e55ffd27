"""Exception types raised by the library."""


class SteinError(ValueError):
    """Base class for all library errors."""


class ParameterError(SteinError):
    """A parameter is outside its admissible range."""


class DomainError(SteinError):
    """Supports or windows are incompatible with the requested operation."""


class PreconditionError(SteinError):
    """A structural precondition of a theorem or identity is not met."""
