"""Exception types shared across the package."""


class InvalidConfigError(ValueError):
    """A configuration value is missing, out of range, or inconsistent."""
