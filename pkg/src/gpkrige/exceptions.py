"""Exception types shared across the library."""


class GpKrigeError(Exception):
    """Base class for all gpkrige errors."""


class InputError(GpKrigeError, ValueError):
    """Invalid argument: shape mismatch, bad configuration, out-of-range value."""


class SingularityError(GpKrigeError):
    """A linear system could not be solved (singular or not positive definite).

    ``pivot`` carries the 0-based index of the failing Cholesky pivot when the
    failure came from a positive-definite factorization, else ``None``.
    """

    def __init__(self, message, pivot=None):
        super().__init__(message)
        self.pivot = pivot


class NumericalError(GpKrigeError):
    """An internal numerical consistency check failed beyond tolerance."""


class StudyError(GpKrigeError):
    """A simulation study could not produce any usable replicate."""
