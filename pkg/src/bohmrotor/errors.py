"""Exception types raised by the bohmrotor package."""


class BohmRotorError(Exception):
    """Base class for all package errors."""


class ConfigurationError(BohmRotorError):
    """Invalid grid, model, or run configuration."""


class OutOfBandError(BohmRotorError):
    """A momentum or time argument lies outside its representable range."""


class ScheduleError(BohmRotorError):
    """A trajectory integration interval straddles a kick."""


class DegenerateFieldError(BohmRotorError):
    """The wave field is identically zero; Bohmian quantities are undefined."""
