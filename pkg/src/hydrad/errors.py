"""Exception types shared across the package."""


class HydradError(Exception):
    """Base class for all errors raised by this package."""


class DomainError(HydradError):
    """An argument is outside the range an operation accepts."""


class DeviceError(HydradError):
    """The device rejected the request (bad channel, unsupported mode, ...)."""


class BusError(HydradError):
    """The bus backend is unavailable. Transient; callers may retry."""


class ConflictError(HydradError):
    """Another watering/calibration activity is already in progress."""


class NotCalibratedError(HydradError):
    """No calibration profile is loaded."""


class InvalidProfileError(HydradError):
    """Calibration profile violates raw_dry > raw_wet."""


class ProfileParseError(HydradError):
    """Profile file is malformed. ``field`` names the offending field."""

    def __init__(self, field: str, message: str):
        super().__init__(f"{field}: {message}")
        self.field = field


class ConfigError(HydradError):
    """Configuration violates an invariant. ``field`` names the offender."""

    def __init__(self, field: str, message: str):
        super().__init__(f"{field}: {message}")
        self.field = field


class OrderingError(HydradError):
    """History append with a timestamp older than the last stored record."""


class StorageError(HydradError):
    """History log I/O failed."""
