"""Exception hierarchy shared across the toolkit."""


class FedGWError(Exception):
    """Base class for all toolkit errors."""


class LoadError(FedGWError):
    """A required input file is missing or unreadable."""


class FormatError(FedGWError):
    """An input file violates its text format."""


class PreconditionError(FedGWError, ValueError):
    """An operation was called on inputs that violate its preconditions."""


class ParameterError(FedGWError, ValueError):
    """A scalar parameter is outside its admissible range."""


class ShapeError(FedGWError, ValueError):
    """Array dimensions do not chain."""


class DomainError(FedGWError, ValueError):
    """A value lies outside its declared bounds."""


class NumericError(FedGWError, ArithmeticError):
    """A computation produced non-finite values."""


class PartitionError(FedGWError):
    """Client partitioning is impossible for the given data."""


class AggregationError(FedGWError):
    """Client models cannot be averaged."""


class StratificationError(FedGWError):
    """A class is missing from a cross-validation fold."""


class SizeCapError(FedGWError):
    """An exponential-time routine was asked to exceed its size cap."""


class ConfigError(FedGWError):
    """An experiment configuration failed validation."""
