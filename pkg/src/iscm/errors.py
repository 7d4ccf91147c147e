"""Exception types shared across the package."""


class ConfigurationError(ValueError):
    """A config value or combination of values is invalid."""


class UsageError(RuntimeError):
    """An operation was called in a state or with arguments it does not support."""
