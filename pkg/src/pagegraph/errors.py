"""Exception hierarchy shared across the package.

CLI exit-code mapping: ValidationError and its subclasses exit 1,
OracleError and its subclasses exit 2.
"""


class PageGraphError(Exception):
    """Base class for all package errors."""


class ValidationError(PageGraphError):
    """Invalid input data, arguments, or state."""


class FormatError(ValidationError):
    """A persisted file could not be parsed or failed validation."""

    def __init__(self, message: str, path: str | None = None, line: int | None = None):
        loc = ""
        if path is not None:
            loc = f" [{path}" + (f":{line}" if line is not None else "") + "]"
        super().__init__(message + loc)
        self.path = path
        self.line = line


class MigrationError(FormatError):
    """A persisted file carries an unsupported schema version."""

    def __init__(self, path: str, found: object, supported: object):
        super().__init__(
            f"unsupported schema version {found!r} (supported: {supported!r})", path=path
        )
        self.found = found
        self.supported = supported


class OracleError(PageGraphError):
    """Base class for model-backend failures."""


class OracleUnavailableError(OracleError):
    """The backend could not produce a response (network, missing cache entry, ...)."""


class OracleParseError(OracleError):
    """The backend responded, but the response does not satisfy the role's contract."""


class GenerationError(PageGraphError):
    """Synthetic-world episode generation failed (e.g. unreachable goal)."""
