"""Shared exception types."""


class ResourceLimitError(RuntimeError):
    """A computation would exceed a hard resource cap (iteration count,
    index magnitude, grid size)."""


class ConfigurationError(ValueError):
    """An experiment configuration is invalid; ``field`` names the offender."""

    def __init__(self, field: str, message: str):
        self.field = field
        super().__init__(f"config field '{field}': {message}")
