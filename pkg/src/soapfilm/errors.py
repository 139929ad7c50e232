"""Exception types shared across the package."""


class SoapfilmError(Exception):
    """Base class for all package errors."""


class DegenerateNodeError(SoapfilmError):
    """Curvature requested at a node on the axis of revolution (r = 0)."""


class IrregularParameterizationError(SoapfilmError):
    """Profile derivative vanishes, so the curve has no tangent there."""


class ResolutionError(SoapfilmError):
    """Grid too coarse to resolve the curvature of the surface."""

    def __init__(self, message, required_intervals=None):
        super().__init__(message)
        self.required_intervals = required_intervals


class GraphRegimeError(SoapfilmError):
    """A normal graph left the small-C1 regime in which the graph calculus holds."""

    def __init__(self, message, node=None):
        super().__init__(message)
        self.node = node


class FocalDistanceError(SoapfilmError):
    """Offset distance reaches a focal point of the base surface."""


class NewtonDivergenceError(SoapfilmError):
    def __init__(self, message, last_residual=None):
        super().__init__(message)
        self.last_residual = last_residual


class ContinuationError(SoapfilmError):
    """Continuation in the gravity parameter stalled before reaching the target."""

    def __init__(self, message, largest_reached=0.0, last_residual=None):
        super().__init__(message)
        self.largest_reached = largest_reached
        self.last_residual = last_residual


class UnsupportedConfigurationError(SoapfilmError):
    pass


class StabilityError(SoapfilmError):
    """Base surface is not strictly stable."""


class PreconditionError(SoapfilmError, ValueError):
    pass
