"""Exception types shared across the package."""


class SbcliftError(Exception):
    """Base class for all package errors."""


class DomainError(SbcliftError, ValueError):
    """An argument lies outside the domain an operation accepts."""


class InvariantError(SbcliftError):
    """Input data violates a structural invariant (e.g. two units for one item)."""


class PreconditionError(SbcliftError, ValueError):
    """An operation was called in a state its contract excludes."""


class ParseError(SbcliftError, ValueError):
    """Text input could not be parsed."""


class UnsatisfiableTask(SbcliftError):
    """The learning task has no hypothesis honouring all hard examples."""
