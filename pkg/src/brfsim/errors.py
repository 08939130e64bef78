"""Error types shared across the package.

The CLI maps these onto exit codes: ConfigError -> 2, DataError -> 3,
NumericError -> 4.
"""


class ConfigError(ValueError):
    """Invalid configuration value or combination."""


class DataError(ValueError):
    """Malformed or missing input data (files, caches, shapes)."""


class NumericError(RuntimeError):
    """Non-finite values produced during simulation or training."""

    def __init__(self, message: str, step: int | None = None):
        super().__init__(message)
        self.step = step
