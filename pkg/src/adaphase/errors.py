"""Exception types raised across the package."""


class AdaphaseError(Exception):
    """Base class for package errors."""


class DegenerateProbeError(AdaphaseError, ValueError):
    """The probe carries no phase information (r = 0) or no energy."""


class InvalidConfigError(AdaphaseError, ValueError):
    """A configuration or sweep specification violates its invariants."""


class CapacityError(AdaphaseError, OverflowError):
    """Fixed-point accumulators cannot hold the requested sample count."""
