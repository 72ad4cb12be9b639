"""Exception hierarchy shared across the toolkit."""

from __future__ import annotations


class RadarKitError(Exception):
    """Base class for all toolkit errors."""


class ConfigError(RadarKitError):
    """Invalid configuration (bad window geometry, out-of-range parameters)."""


class PlaneFitError(RadarKitError):
    """Ground-plane estimation cannot run (too few or degenerate points)."""


class RegistrationError(RadarKitError):
    """ICP found no usable correspondences.

    Carries the initial transform so callers can fall back to it.
    """

    def __init__(self, message: str, init_transform=None):
        super().__init__(message)
        self.init_transform = init_transform


class PipelineError(RadarKitError):
    """Ground-truth pipeline failure (e.g. a missing pose link in the window)."""


class MetricUndefinedError(RadarKitError):
    """Metric requested on an input for which it is undefined (empty reference)."""


class FileFormatError(RadarKitError):
    """Malformed on-disk data: bad magic, truncation, invalid rows."""
