"""Exception types raised across the package."""


class SirpcaError(Exception):
    """Base class for all package errors."""


class InvalidInputError(SirpcaError, ValueError):
    """Input contains non-finite values or violates a precondition."""


class DimensionError(SirpcaError, ValueError):
    """Matrix shapes do not conform."""


class FactorizationError(SirpcaError, ArithmeticError):
    """The singular value decomposition failed to converge."""


class RankDeficientError(SirpcaError, ValueError):
    """Columns passed to orthonormalization are linearly dependent."""


class UndefinedCriterionError(SirpcaError, ValueError):
    """Relative recovery error requested against a zero ground truth."""


class FormatError(SirpcaError, ValueError):
    """A file could not be parsed.

    Parameters
    ----------
    message : str
        What went wrong.
    path : str, optional
        File being parsed.
    line : int, optional
        1-based line number of the offending line.
    """

    def __init__(self, message, path=None, line=None):
        self.path = path
        self.line = line
        where = ""
        if path is not None:
            where = f"{path}"
            if line is not None:
                where += f":{line}"
            where += ": "
        elif line is not None:
            where = f"line {line}: "
        super().__init__(where + message)
