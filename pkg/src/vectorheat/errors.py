"""Exception types shared across the package."""


class VectorHeatError(Exception):
    """Base class for all package errors."""


class InvalidParameterError(VectorHeatError, ValueError):
    """A model or operation parameter is out of its allowed range."""


class DomainError(VectorHeatError, ValueError):
    """An argument lies outside the mathematical domain (e.g. t <= 0)."""


class PreconditionError(VectorHeatError, ValueError):
    """A documented precondition of an operation does not hold."""


class InputError(VectorHeatError, ValueError):
    """Inputs are inconsistent with each other (shapes, manifolds, files)."""


class UnsupportedError(VectorHeatError, NotImplementedError):
    """The request exceeds what the closed-form machinery implements."""


class NumericFailure(VectorHeatError, ArithmeticError):
    """A numerical procedure failed to converge or produced garbage."""


class GraphBuildError(VectorHeatError):
    """The neighbour graph could not be built (e.g. it is disconnected)."""


class AlignmentError(VectorHeatError):
    """Frame alignment is degenerate."""


class RangeError(VectorHeatError, ValueError):
    """A spectral query reaches past the computed truncation."""
