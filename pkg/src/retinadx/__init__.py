"""Retinal fundus analysis: preprocessing, vessel segmentation, texture and
vascular features, and per-class auto-associative network classification."""

__version__ = "0.1.0"

from .errors import (  # noqa: E402
    ConfigError,
    DataError,
    DegenerateInputError,
    DimensionMismatchError,
    ImageFormatError,
    NumericError,
    RetinaError,
    TruncatedImageError,
)
from .labels import ClassLabel  # noqa: E402

__all__ = [
    "ClassLabel",
    "ConfigError",
    "DataError",
    "DegenerateInputError",
    "DimensionMismatchError",
    "ImageFormatError",
    "NumericError",
    "RetinaError",
    "TruncatedImageError",
    "__version__",
]
