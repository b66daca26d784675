"""Exception types shared across the package."""


class RosaError(Exception):
    """Base class for all errors raised by this package."""


class UnsupportedSemiringError(RosaError):
    """Requested preset name is not one of the supported algebras."""


class DomainError(RosaError):
    """A value lies outside the semiring's value domain."""


class ArityError(RosaError):
    """Parallel argument vectors have mismatched lengths."""


class AlgebraMismatchError(RosaError):
    """Binary array operation applied across two different semirings."""


class NotASelectorError(RosaError):
    """Identity-pair construction saw a duplicated row or column key."""


class ShapeError(RosaError):
    """Array dimensions incompatible for the requested operation."""


class KeyFormatError(RosaError):
    """Key contains bytes that the TSV persistence format cannot carry."""


class ParseError(RosaError):
    """Malformed input line; carries a 1-based line number."""

    def __init__(self, line_number, message):
        super().__init__(f"line {line_number}: {message}")
        self.line_number = line_number


class NoSuchProcessError(RosaError):
    """Operation referenced a process ID with no live row."""


class NoSuchFileError(RosaError):
    """Operation referenced an unknown file ID."""


class InvalidSizeError(RosaError):
    """Memory adjustment would drive a process's allocation below zero."""


class WaitTimeoutError(RosaError):
    """Polling budget exhausted while children were still live."""


class AllocatorExhaustedError(RosaError):
    """ID allocator cannot produce further unique identifiers."""


class BenchmarkError(RosaError):
    """A benchmark worker failed; partial results are invalid."""

    def __init__(self, message, partial_results=()):
        super().__init__(message)
        self.partial_results = list(partial_results)
