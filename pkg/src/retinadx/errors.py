"""Exception hierarchy shared by the library and the command line."""


class RetinaError(Exception):
    """Base class for all package errors."""


class ConfigError(RetinaError, ValueError):
    """Invalid parameter or configuration value."""


class DataError(RetinaError):
    """Input data is missing, malformed, or inconsistent."""


class ImageFormatError(DataError):
    """A raster file has a malformed header."""


class TruncatedImageError(ImageFormatError):
    """A raster file ends before all declared pixels were read."""


class DimensionMismatchError(DataError, ValueError):
    """Two arrays that must share a shape do not."""


class DegenerateInputError(DataError, ValueError):
    """Input for which the requested quantity is undefined."""


class NumericError(RetinaError, ArithmeticError):
    """A numerical procedure failed, e.g. training diverged."""
