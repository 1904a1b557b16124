"""Exception types shared across the package."""


class HermcodeError(Exception):
    """Base class for all library errors."""


class InvalidParameterError(HermcodeError, ValueError):
    """A parameter is outside the supported domain."""


class ResourceLimitError(HermcodeError):
    """A request exceeds the configured size caps."""


class IntegrityError(HermcodeError):
    """A certificate, cache file or witness failed verification."""


class CounterexampleError(HermcodeError):
    """An enumeration found a configuration that a proven bound rules out."""
