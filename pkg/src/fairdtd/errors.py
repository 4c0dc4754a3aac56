"""Exception taxonomy shared by every module.

Errors are split by contract: shape violations, numeric-domain violations,
empty selections, configuration problems, data-schema problems, tape misuse,
missing dependencies between training phases, and metrics that are
mathematically undefined for the given inputs.
"""


class FairdtdError(Exception):
    """Base class for all package errors."""


class DimensionError(FairdtdError, ValueError):
    """Operand shapes do not satisfy an operation's contract."""


class DomainError(FairdtdError, ValueError):
    """A numeric value is outside its legal domain (e.g. temperature <= 0)."""


class EmptySelectionError(FairdtdError, ValueError):
    """A mask or filter selected no elements where at least one is required."""


class ConfigError(FairdtdError, ValueError):
    """Invalid configuration value or combination."""


class SchemaError(FairdtdError, ValueError):
    """An input file does not match the documented schema."""


class ReferentialError(SchemaError):
    """An edge endpoint references a node id that does not exist."""


class TapeError(FairdtdError, RuntimeError):
    """A tensor was used with a tape it does not belong to."""


class DependencyError(FairdtdError, RuntimeError):
    """A training phase requires an artifact that was not provided."""


class UndefinedMetricError(FairdtdError, ValueError):
    """The requested metric is undefined for this prediction set."""


class CompatibilityError(FairdtdError, ValueError):
    """A checkpoint and a dataset (or manifest and blob) do not match."""
