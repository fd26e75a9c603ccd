"""Exception classes shared across the package.

The CLI maps these onto distinct exit codes; the library raises them so
callers can tell usage mistakes from broken inputs from broken index files.
"""


class SealIndexError(Exception):
    """Base class for all package-specific errors."""


class ParseError(SealIndexError):
    """Malformed FASTA input. Carries the 1-based line number when known."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class ParameterError(SealIndexError):
    """A build or query parameter is outside its legal range."""


class EncodingError(SealIndexError):
    """A symbol cannot be represented in the alphabet in use."""


class FormatError(SealIndexError):
    """Index file is malformed, truncated, or fails to decode."""

    def __init__(self, message, offset=None):
        if offset is not None:
            message = f"{message} (at byte offset {offset})"
        super().__init__(message)
        self.offset = offset


class KeyfileError(SealIndexError):
    """Key material is missing, unreadable, or the wrong size."""


class PatternError(SealIndexError):
    """Query pattern is unsupported (shorter than the extension order)."""


class VerificationError(SealIndexError):
    """Index answers disagree with the reference scanner."""
