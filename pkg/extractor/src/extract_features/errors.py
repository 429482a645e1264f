class ExtractionError(Exception):
    """Dataset or image problem; exit code 3 at the CLI."""


class ModelUnavailableError(ExtractionError):
    """Weights could not be loaded; the message says how to get them."""


class ConfigError(Exception):
    """Bad flag or argument combination; exit code 2 at the CLI."""
