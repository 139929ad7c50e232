"""Soap films as almost-minimal surfaces: catenoid families, normal graphs over
minimal surfaces, gravity films, deficits and accessibility of boundaries.
"""

from .errors import (
    ContinuationError,
    DegenerateNodeError,
    FocalDistanceError,
    GraphRegimeError,
    IrregularParameterizationError,
    NewtonDivergenceError,
    PreconditionError,
    ResolutionError,
    SoapfilmError,
    StabilityError,
    UnsupportedConfigurationError,
)

__version__ = "0.1.0"

__all__ = [
    "ContinuationError",
    "DegenerateNodeError",
    "FocalDistanceError",
    "GraphRegimeError",
    "IrregularParameterizationError",
    "NewtonDivergenceError",
    "PreconditionError",
    "ResolutionError",
    "SoapfilmError",
    "StabilityError",
    "UnsupportedConfigurationError",
]
