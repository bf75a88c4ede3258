"""Exception hierarchy shared across the package.

The CLI maps these onto process exit codes: InputError -> 2,
NumericalError -> 3.
"""


class KrrCheckError(Exception):
    """Base class for all package errors."""


class InputError(KrrCheckError, ValueError):
    """Invalid user-supplied data or configuration."""


class NumericalError(KrrCheckError, RuntimeError):
    """A numerical routine failed (factorization, eigensolver, ...)."""


class EstimationError(NumericalError):
    """An iterative estimator failed to converge."""
