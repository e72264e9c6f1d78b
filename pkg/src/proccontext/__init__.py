"""Process matrices, non-contextuality no-go checks and classical counter-models."""

__version__ = "0.1.0"

from ._backend import BACKEND
from .errors import (
    DimensionError,
    NumericalConsistencyError,
    ProcContextError,
    ResourceError,
    ValidationError,
)

__all__ = [
    "BACKEND",
    "DimensionError",
    "NumericalConsistencyError",
    "ProcContextError",
    "ResourceError",
    "ValidationError",
    "__version__",
]
