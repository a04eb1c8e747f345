"""Exception types shared across the package."""


class DdaHashError(Exception):
    """Base class for all errors raised by ddahash."""


class InvalidArgumentError(DdaHashError, ValueError):
    """An argument has the wrong shape, range or type."""


class InvalidStateError(DdaHashError, RuntimeError):
    """An object is not in a state that allows the requested operation."""


class IrmaParseError(InvalidArgumentError):
    """An IRMA code string could not be parsed.

    ``position`` is the zero-based character offset of the offending
    character in the input text, or ``None`` for length errors.
    """

    def __init__(self, message, text, position=None):
        super().__init__(message)
        self.text = text
        self.position = position


class FormatError(DdaHashError):
    """A persisted file (model, codes, projections) is malformed."""

    def __init__(self, message, path=None, expected=None, actual=None):
        super().__init__(message)
        self.path = path
        self.expected = expected
        self.actual = actual


class ImageLoadError(DdaHashError, OSError):
    """An image file could not be read or decoded."""

    def __init__(self, message, path):
        super().__init__(f"{path}: {message}")
        self.path = path
