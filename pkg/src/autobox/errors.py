"""Shared exception types."""


class ParseError(ValueError):
    """Raised when an input file or stream violates its format."""
