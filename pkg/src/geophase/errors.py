"""Exception types shared across the package."""


class GeophaseError(Exception):
    """Base class for all package errors."""


class InvalidInputError(GeophaseError, ValueError):
    """An argument violates a documented precondition."""


class UndefinedPhaseError(GeophaseError, ArithmeticError):
    """The geometric factor vanishes, so its argument is not defined."""


class InvalidInterferometerError(GeophaseError, ValueError):
    """Interferometer rows are not orthonormal (not rows of a unitary)."""


class CapacityError(GeophaseError):
    """The requested photon number exceeds the brute-force engine's cap."""
