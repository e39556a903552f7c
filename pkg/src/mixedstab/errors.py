"""Exception types shared across the package."""


class MixedStabError(Exception):
    """Base class for all package-specific errors."""


class MeshFormatError(MixedStabError):
    """Mesh text could not be parsed; message carries the line number."""


class MeshTopologyError(MixedStabError):
    """Mesh connectivity is invalid; message names the offending cell."""


class UnsupportedDegreeError(MixedStabError, ValueError):
    """Requested polynomial or quadrature degree is out of range."""


class NotPositiveDefiniteError(MixedStabError):
    """Cholesky factorization hit a non-positive pivot."""

    def __init__(self, pivot, message=None):
        self.pivot = pivot
        super().__init__(message or f"matrix is not positive definite (pivot {pivot})")


class EigensolveError(MixedStabError):
    """Dense eigenvalue solver failed to converge or received bad input."""


class NumericalError(MixedStabError):
    """A numerical post-condition (residual, spectrum range, ...) failed."""


class SpuriousModeError(NumericalError):
    """Pressure system is singular because spurious modes are present."""
