"""Exception types shared across the package."""


class TubalError(Exception):
    """Base class for all errors raised by this package."""


class ShapeMismatchError(TubalError, ValueError):
    """Operands do not conform (wrong rows/columns/tube length)."""


class OrthogonalityError(TubalError, ValueError):
    """An input that must be (partially) orthogonal fails the check.

    Carries the measured residual so callers can report how far off the
    input was.
    """

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class SingularSliceError(TubalError, ArithmeticError):
    """A per-frequency matrix is numerically rank deficient.

    ``slice_index`` is the 1-based index of the offending Fourier slice.
    """

    def __init__(self, message, slice_index):
        super().__init__(message)
        self.slice_index = slice_index


class SingularFilterError(TubalError, ArithmeticError):
    """A regularization filter tube has a vanishing Fourier coefficient."""

    def __init__(self, message, tube_index, fourier_index):
        super().__init__(message)
        self.tube_index = tube_index
        self.fourier_index = fourier_index


class ConjugateSymmetryError(TubalError, ValueError):
    """A frequency stack flagged as real-origin is not conjugate symmetric."""


class FormatError(TubalError, ValueError):
    """A file does not conform to the expected on-disk format."""
