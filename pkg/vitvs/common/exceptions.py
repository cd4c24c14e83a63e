"""Custom exceptions used in the `vitvs` package.
"""


class ConfigurationError(Exception):
    """Raised when there is a problem with a configuration file, flag or
    config record"""


class InvalidInputError(ValueError):
    """Raised when an operation receives values it cannot work with"""


class ShapeError(InvalidInputError):
    """Raised when array or tensor shapes are inconsistent"""


class DimensionMismatch(ShapeError):
    """Raised when data dimensions don't match the model configuration"""


class NumericalError(ArithmeticError):
    """Raised in debug mode when an operation produces NaN or Inf"""


class DataIOError(OSError):
    """Raised if a file cannot be read, parsed or written"""


class CheckpointError(DataIOError):
    """Raised if a checkpoint file has a bad header or manifest"""
