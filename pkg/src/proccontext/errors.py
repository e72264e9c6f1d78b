"""Exception types raised across the package."""


class ProcContextError(Exception):
    """Base class for all package errors."""


class DimensionError(ProcContextError, ValueError):
    """Operand shapes or tensor-factor dimensions are incompatible."""


class ValidationError(ProcContextError, ValueError):
    """An object violates its defining invariant (unitarity, CP, weights...)."""


class NumericalConsistencyError(ProcContextError, ArithmeticError):
    """A quantity that must be real or consistent came out otherwise."""


class ResourceError(ProcContextError, RuntimeError):
    """An exhaustive enumeration would exceed its configured guard."""
