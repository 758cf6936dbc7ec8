"""Exception types shared across the toolkit.

The CLI maps these onto exit codes: usage problems exit 1, data problems
exit 2, numerical failures exit 3.
"""


class DataError(ValueError):
    """Raised when input data violates a documented contract."""


class NumericalError(RuntimeError):
    """Raised when a numerical routine cannot produce a usable result."""
