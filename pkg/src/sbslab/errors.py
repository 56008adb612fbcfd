"""Exception types shared across the package, mapped to CLI exit codes."""


class SbsError(Exception):
    """Base class for package errors."""


class ConfigError(SbsError, ValueError):
    """Invalid configuration, input file, or argument. CLI exit code 1."""


class RegimeError(SbsError, ValueError):
    """Parameters outside the soft-scattering regime the formulas assume."""


class CapacityError(SbsError, RuntimeError):
    """Assembled matrix would exceed the configured dimension cap. Exit code 2."""

    def __init__(self, message: str, parameter: str | None = None):
        super().__init__(message)
        self.parameter = parameter


class CalibrationError(SbsError, RuntimeError):
    """Shell-unitary construction failed to reproduce its target diagonal."""
