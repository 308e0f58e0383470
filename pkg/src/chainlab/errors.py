"""Exception hierarchy shared across the package."""


class ChainLabError(Exception):
    """Base class for all package errors."""


class ConfigError(ChainLabError):
    """Malformed configuration document or invalid run parameters."""


class HorizonError(ChainLabError):
    """A time index was requested beyond the model's kernel horizon."""


class NumericalError(ChainLabError):
    """A numerical routine (eigensolver, LP) failed to converge."""


class EnumerationError(ChainLabError):
    """An exact enumeration would exceed the configured path budget."""


class VerificationError(ChainLabError):
    """A self-check that must hold by construction failed at runtime."""
