"""Exception types raised across the package."""


class ScreeningError(Exception):
    """Base class for all package errors."""


class DataError(ScreeningError, ValueError):
    """Input data cannot be turned into a valid dataset."""


class ParseError(DataError):
    def __init__(self, message, row=None, column=None):
        loc = []
        if row is not None:
            loc.append(f"row {row}")
        if column is not None:
            loc.append(f"column {column}")
        if loc:
            message = f"{message} ({', '.join(loc)})"
        super().__init__(message)
        self.row = row
        self.column = column


class ConstantColumn(DataError):
    def __init__(self, name):
        super().__init__(f"column {name!r} has zero variance")
        self.name = name


class BadResponse(DataError):
    pass


class DimensionTooSmall(DataError):
    pass


class DegenerateColumn(DataError):
    """A column collapsed to a single level after discretization."""


class DegeneratePair(DataError):
    """A pair involves a column with fewer than two levels."""


class NumericError(ScreeningError, ArithmeticError):
    """A numerical routine failed."""


class NotConverged(NumericError):
    def __init__(self, message, discrepancy=float("nan")):
        super().__init__(message)
        self.discrepancy = discrepancy


class Collinear(NumericError):
    pass


class Separation(NumericError):
    pass


class IndexOutOfRange(ScreeningError, IndexError):
    pass
