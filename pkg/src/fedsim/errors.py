"""Exception types shared across the package."""


class FedSimError(Exception):
    """Base class for all errors raised by fedsim."""


class ConfigError(FedSimError):
    """Invalid configuration value, unknown key, or inconsistent settings."""


class DimensionError(FedSimError):
    """Array shapes or label ranges do not match the model spec."""


class EmptyDataError(FedSimError):
    """An operation received an empty dataset or batch."""


class SpecMismatchError(FedSimError):
    """Parameter vectors bound to different model specs were combined."""


class ShardError(FedSimError):
    """A class has too few rows for the requested shard size."""


class SchemaError(FedSimError):
    """CSV schema problem: a required column is missing."""


class ParseError(FedSimError):
    """A CSV cell could not be parsed as a number."""


class ClusterError(FedSimError):
    """Invalid input to a clustering operation."""
