# processing/errors.py


"""Exception hierarchy shared by the processing modules and the CLI.

The CLI maps each class to an exit code:
 - PreconditionError -> 3 (input outside an operation's domain)
 - PrecisionError    -> 4 (p-adic precision or numeric certificate exhausted)
 - ResourceError     -> 4 (bit budget / iteration cap exceeded)
"""


class LattesHeightError(Exception):
    """Base class for every error raised on purpose by this package."""


class PreconditionError(LattesHeightError, ValueError):
    """An operation was called outside its documented domain."""


class PrecisionError(LattesHeightError, ArithmeticError):
    """Not enough precision to certify a result."""


class ResourceError(LattesHeightError, RuntimeError):
    """A computation hit its configured budget.

    `estimate` holds whatever partial result was available when the budget
    ran out (for canonical heights: a HeightEstimate with its larger bound).
    """

    def __init__(self, message: str, estimate=None):
        super().__init__(message)
        self.estimate = estimate
