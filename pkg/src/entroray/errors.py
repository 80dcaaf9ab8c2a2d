"""Exception hierarchy.

Every error raised by this package derives from :class:`EntrorayError`, so
callers can catch one type at the boundary.  The subclasses mirror the
failure modes of the public operations: bad arguments, numerically invalid
distributions, geometric degeneracies, and file-format problems.
"""


class EntrorayError(Exception):
    """Base class for all package errors."""


class InvalidArgumentError(EntrorayError, ValueError):
    """An argument violates an operation's preconditions."""


class InvalidDistributionError(EntrorayError, ValueError):
    """A mass vector is not a probability distribution within tolerance."""


class UndefinedDistanceError(EntrorayError, ArithmeticError):
    """Normalized ray distance is undefined (non-positive inner product)."""


class DegenerateInputError(EntrorayError, ValueError):
    """Input does not have the rank/shape the construction requires."""


class ParseError(EntrorayError, ValueError):
    """A data file failed to parse.

    Attributes:
        path: file being read.
        line: 1-based line number of the offending line (0 if unknown).
    """

    def __init__(self, message, path="", line=0):
        super().__init__(f"{path}:{line}: {message}" if path else message)
        self.path = path
        self.line = line
