"""Exception types raised across the package."""


class PRWalkError(Exception):
    """Base class for all errors raised by prwalk."""


class NotStochasticError(PRWalkError, ValueError):
    pass


class NotDoublyStochasticError(PRWalkError, ValueError):
    pass


class NonPrimitiveError(PRWalkError, ValueError):
    pass


class IndeterminateRatioError(PRWalkError, ValueError):
    pass


class BadParameterError(PRWalkError, ValueError):
    pass


class HorizonTooLargeError(PRWalkError, ValueError):
    pass


class UnsatisfiableError(PRWalkError):
    """The embedding constraint search found no assignment."""


class NotInImageError(PRWalkError, ValueError):
    pass


class NotAdjacentError(PRWalkError, ValueError):
    pass


class ParseError(PRWalkError, ValueError):
    """Malformed input text; carries the 1-based line and column."""

    def __init__(self, message, line=None, column=None):
        self.line = line
        self.column = column
        where = ""
        if line is not None:
            where = f"line {line}"
            if column is not None:
                where += f", column {column}"
            where += ": "
        super().__init__(where + message)
