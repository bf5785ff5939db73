"""
Error types raised by the twoweight app.

Input-like problems also derive from ``ValueError``; failed verifications derive
from ``VerificationError`` and carry the offending quantities in ``details`` so
the report writer can turn them into a falsification certificate.
"""


class WeightLabError(Exception):
    def __init__(self, message, details=None):
        super().__init__(message)
        self.message = message
        self.details = details or {}


class GridError(WeightLabError, ValueError):
    pass


class OutOfRootError(GridError):
    pass


class CoverUnavailableError(GridError):
    pass


class AlignmentError(GridError):
    pass


class BudgetExceededError(WeightLabError, ValueError):
    pass


class ParameterError(WeightLabError, ValueError):
    pass


class DegenerateSystemError(WeightLabError, ValueError):
    pass


class VerificationError(WeightLabError):
    """An asserted inequality failed."""


class SparsityError(VerificationError):
    pass


class DominationError(VerificationError):
    pass


class CarlesonError(VerificationError):
    pass


class BoundViolationError(VerificationError):
    pass


class ChainViolationError(VerificationError):
    pass
