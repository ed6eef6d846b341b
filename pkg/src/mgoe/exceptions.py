"""Exception hierarchy.

Each class carries the process exit status the CLI reports for it, so the
taxonomy is stable: 0 success, 2 usage, 3 configuration, 4 contract,
5 numerical, 6 IO.
"""


class MGOEError(Exception):
    """Base class for all errors raised by this package."""

    category = "error"
    exit_code = 1


class ConfigurationError(MGOEError, ValueError):
    """Invalid parameters or malformed configuration."""

    category = "config"
    exit_code = 3


class ContractError(MGOEError, ValueError):
    """An operation was called outside its precondition."""

    category = "contract"
    exit_code = 4


class NumericalError(MGOEError, ArithmeticError):
    """A numerical routine failed (non-convergence, rank-deficient fit)."""

    category = "numerical"
    exit_code = 5

    def __init__(self, message, *, order=None, degree=None, member=None):
        super().__init__(message)
        self.order = order
        self.degree = degree
        self.member = member


class OutputError(MGOEError, OSError):
    """Results could not be written."""

    category = "io"
    exit_code = 6


USAGE_EXIT_CODE = 2
