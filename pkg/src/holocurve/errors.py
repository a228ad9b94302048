"""Exception hierarchy shared by every layer of the package."""

from __future__ import annotations


class HolocurveError(Exception):
    """Base class for all errors raised by holocurve."""


class DomainError(HolocurveError, ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class SingularPointError(HolocurveError, ArithmeticError):
    """Division or logarithm evaluated at (numerically) zero.

    ``subexpression`` holds the offending node when the failure happened
    during expression evaluation.
    """

    def __init__(self, message: str, subexpression=None):
        super().__init__(message)
        self.subexpression = subexpression


class ChartError(HolocurveError):
    """The curve left the affine chart in which fields are written."""


class PoleError(HolocurveError):
    """A pole of a meromorphic object was not cleared by its pole section."""


class NonReducedError(HolocurveError):
    """All homogeneous components vanish simultaneously."""


class DegenerateConfigurationError(HolocurveError):
    """The configuration violates a non-degeneracy hypothesis.

    Raised e.g. when the curve lies inside the divisor, the field is
    ineffective, or the curve is autoparallel.
    """


class QuadratureError(HolocurveError):
    """Adaptive quadrature failed to reach its tolerance."""

    def __init__(self, message: str, estimate=None):
        super().__init__(message)
        self.estimate = estimate


class BoundaryZeroError(HolocurveError):
    """A zero sits on the contour used for counting."""

    def __init__(self, message: str, location=None):
        super().__init__(message)
        self.location = location


class StationaryPointError(HolocurveError):
    """The curve has vanishing projective derivative at the point."""


class ExpressionSyntaxError(HolocurveError, ValueError):
    """Malformed expression text; ``position`` is a 0-based offset."""

    def __init__(self, message: str, text: str, position: int):
        super().__init__(f"{message} at column {position + 1}: {text!r}")
        self.text = text
        self.position = position
        self.reason = message
