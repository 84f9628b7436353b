"""Exception types shared across the package."""


class InputError(ValueError):
    """Bad user-supplied data: wrong dimensions, empty clouds, malformed files."""


class ConfigError(ValueError):
    """Inconsistent configuration, e.g. a scale grid too short for a requested read."""
