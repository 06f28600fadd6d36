"""Exception types shared across the package.

Both exceptions derive from ``ValueError`` so callers that only care about
"bad input" can catch a single base class; the CLI maps them to exit code 2.
"""


class ParseError(ValueError):
    """A file could not be parsed (malformed row, wrong header, bad literal).

    Parameters
    ----------
    message : str
        Human-readable description.
    line : int, optional
        One-based line number in the offending file, when known.
    """

    def __init__(self, message: str, line: int | None = None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class ValidationError(ValueError):
    """Input was syntactically fine but violates a documented precondition."""
