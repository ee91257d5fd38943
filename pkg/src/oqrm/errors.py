"""Exception hierarchy shared across the package."""


class OqrmError(Exception):
    """Base class for all package errors."""


class ConfigError(OqrmError, ValueError):
    """Invalid parameters or inconsistent configuration."""


class DomainError(OqrmError, ValueError):
    """Argument outside the mathematical domain of an operation."""


class StabilityError(OqrmError):
    """Bosonic quadratic form is not positive definite."""


class ResourceError(OqrmError):
    """Requested dense dimension exceeds the configured cap."""


class StepError(OqrmError):
    """Local integrator failure during a TDVP sweep."""

    def __init__(self, message, site=None):
        super().__init__(message if site is None else f"{message} (site {site})")
        self.site = site


class ProtocolError(OqrmError):
    """A protocol precondition failed at run time."""


class FitError(OqrmError):
    """Nonlinear fit failed or received degenerate data."""


class WindowError(FitError):
    """Fit window is empty or contains unusable values."""


class RangeError(OqrmError, ValueError):
    """Requested time lies outside the recorded range."""
