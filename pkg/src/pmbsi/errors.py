"""Exception hierarchy shared by the library and the CLI."""


class PMBSIError(Exception):
    """Base class for all errors raised by this package."""


class DataError(PMBSIError, ValueError):
    """Input data cannot be used (empty, too short, degenerate split)."""


class WindowError(DataError, IndexError):
    """A string window reaches outside the series."""


class PositivityError(DataError):
    """A non-positive sample reached a ratio-based map."""


class ParameterError(PMBSIError, ValueError):
    """Model or optimizer settings violate their constraints."""


class NumericalError(PMBSIError, ArithmeticError):
    """A computation produced no usable finite result."""
