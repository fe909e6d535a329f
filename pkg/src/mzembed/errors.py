"""Exception hierarchy shared across the package."""


class MzembedError(Exception):
    """Base class for all package errors."""


class DimensionError(MzembedError):
    """Tensor or matrix shapes do not line up."""


class ConfigError(MzembedError):
    """Invalid or inconsistent configuration value."""


class ParseError(MzembedError):
    """Malformed input file; carries a line number when known."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class DataError(MzembedError):
    """Dataset-level violation: missing labels, bad split sizing, etc."""


class NumericsError(MzembedError):
    """Numeric guard tripped: zero norms, degenerate statistics, divergence."""


class CheckpointError(MzembedError):
    """Checkpoint file malformed or inconsistent with the requested config."""
