"""Exception types shared across the package."""


class CapLabError(Exception):
    """Base class for all caplab errors."""


class DomainError(CapLabError, ValueError):
    """Argument outside the domain of a curve or body operation."""


class RangeError(CapLabError, ValueError):
    """Requested value outside the range of an invertible quantity."""


class UnsupportedOrderError(CapLabError, ValueError):
    """Derivative order not available for this curve family."""


class EstimationError(CapLabError, RuntimeError):
    """A limit or calibration estimate failed to converge."""


class NonConvergenceError(CapLabError, RuntimeError):
    """Quadrature did not reach the requested tolerance within budget.

    Carries the partial value and its error estimate.
    """

    def __init__(self, message, value=None, error=None, panels=None):
        super().__init__(message)
        self.value = value
        self.error = error
        self.panels = panels


class DegenerateCapError(CapLabError, ValueError):
    """Cap length too small to normalize against."""


class DegenerateBodyError(CapLabError, ValueError):
    """Body has (numerically) zero width or fails convexity checks."""


class ResolutionError(CapLabError, ValueError):
    """Grid or polyline resolution insufficient for the requested scale."""


class ScaleError(CapLabError, ValueError):
    """Dilated geometry does not fit on the periodic torus."""


class ConfigError(CapLabError, ValueError):
    """Invalid experiment configuration (CLI exit code 2)."""
