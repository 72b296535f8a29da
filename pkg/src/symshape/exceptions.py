"""Exception types shared across the package."""


class SymshapeError(Exception):
    """Base class for all errors raised by symshape."""


class ShapeMismatch(SymshapeError, ValueError):
    """Two shapes or fields are not in vertex-wise correspondence."""


class NonFiniteState(SymshapeError, FloatingPointError):
    """A geodesic integration produced non-finite or exploding coordinates."""


class DegenerateNeighborhood(SymshapeError, ValueError):
    """Every face incident to some vertex has (numerically) zero area."""


class LengthMismatch(SymshapeError, ValueError):
    pass


class ParseError(SymshapeError, ValueError):
    """Malformed input file. ``line`` is 1-based, or None when unknown."""

    def __init__(self, message, line=None, path=None):
        self.line = line
        self.path = path
        where = ""
        if path is not None:
            where += f"{path}: "
        if line is not None:
            where += f"line {line}: "
        super().__init__(where + message)
