"""Geometric phases and nonlocality in a fixed cyclic photonic interferometer."""

__version__ = "0.1.0"

from .errors import (  # noqa: E402
    CapacityError,
    GeophaseError,
    InvalidInputError,
    InvalidInterferometerError,
    UndefinedPhaseError,
)
from .states import (  # noqa: E402
    BlochVector,
    GeometricFactor,
    MixedState,
    PureState,
    geometric_factor,
    geometric_factor_mixed,
    pancharatnam_phase,
    pure_from_bloch,
    spherical_polygon_solid_angle,
    state_to_bloch,
)

__all__ = [
    "BlochVector",
    "CapacityError",
    "GeometricFactor",
    "GeophaseError",
    "InvalidInputError",
    "InvalidInterferometerError",
    "MixedState",
    "PureState",
    "UndefinedPhaseError",
    "geometric_factor",
    "geometric_factor_mixed",
    "pancharatnam_phase",
    "pure_from_bloch",
    "spherical_polygon_solid_angle",
    "state_to_bloch",
]
