"""Exception hierarchy shared by all modules.

Each class carries the CLI exit code it maps to.
"""


class FractimeError(Exception):
    """Base class for all toolkit errors."""

    exit_code = 1


class ResolutionError(FractimeError):
    """A realization is too coarse for the requested scale, or a depth guard fails."""

    exit_code = 3


class ConfigError(FractimeError):
    """A configuration violates the preconditions of an operation."""

    exit_code = 1


class ExponentError(ConfigError):
    """Exponent arithmetic is undefined or an excluded configuration was requested."""


class SchemaError(FractimeError):
    """A JSON config or document does not match its schema."""

    exit_code = 2


class InsufficientDataError(FractimeError):
    """Too few samples to fit a slope."""

    exit_code = 1
