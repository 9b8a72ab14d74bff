"""Exception types shared across the library.

Every error message states the mathematical reason for the failure so CLI
traces can carry it verbatim.
"""


class CharpresError(Exception):
    """Base class for all library-specific failures."""


class PolyParseError(CharpresError):
    """Raised when polynomial text does not conform to the input syntax."""


class SceneParseError(CharpresError):
    """Raised on malformed scene files; carries a 1-based line number."""

    def __init__(self, message: str, lineno: int | None = None):
        self.lineno = lineno
        if lineno is not None:
            message = f"line {lineno}: {message}"
        super().__init__(message)


class CommandError(CharpresError):
    """Raised when a scene script command cannot be executed."""


class PermissibilityError(CharpresError):
    """Raised when a blowup center fails a permissibility requirement."""


class NotMonicError(CharpresError):
    """Raised when a section polynomial is not monic in its section variable."""


class DegenerateSlopeError(CharpresError):
    """Raised when normalization cannot terminate (slope unbounded)."""


class NotNormalFormError(CharpresError):
    """Raised when an operation requires a presentation in normal form."""


class NonMonomialElimError(CharpresError):
    """Raised when the strong-monomial test needs a monomial elimination part."""


class TrackingError(CharpresError):
    """Raised when monomial-exponent tracking hits an inconsistent tower."""
