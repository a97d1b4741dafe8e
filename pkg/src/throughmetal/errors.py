"""Exception types raised across the package."""


class ThroughMetalError(Exception):
    """Base class for all errors raised by this package."""


class DomainError(ThroughMetalError, ValueError):
    """An argument lies outside the domain of a physical formula."""


class ConfigError(ThroughMetalError, ValueError):
    """A configuration object or file is invalid."""


class FramingError(ThroughMetalError, ValueError):
    """A payload does not fit the packet format."""


class FitError(ThroughMetalError, ValueError):
    """Calibration points cannot determine the channel parameters."""


class ComparisonError(ThroughMetalError, ValueError):
    """Bit strings of different lengths were compared."""


class DecodeError(ThroughMetalError, ValueError):
    """The demodulator ran out of samples.

    ``partial_bits`` holds whatever symbols were decided before the
    capture ended.
    """

    def __init__(self, message, partial_bits=""):
        super().__init__(message)
        self.partial_bits = partial_bits
