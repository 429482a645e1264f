"""Error taxonomy shared by the library and the CLI exit codes."""


class NoiseforgeError(Exception):
    """Base class for all toolkit errors."""


class ConfigError(NoiseforgeError):
    """Invalid flags, config file, or parameter combination (CLI exit 2)."""


class DataError(NoiseforgeError):
    """Malformed, inconsistent, or degenerate input data (CLI exit 3)."""


class ValidationError(NoiseforgeError):
    """An end-to-end self-check failed (CLI exit 4)."""
