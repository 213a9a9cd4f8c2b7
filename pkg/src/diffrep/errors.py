"""Exception hierarchy.

Class names are part of the public surface: the command line echoes them
in validation messages.
"""


class DiffrepError(Exception):
    """Base class for all errors raised by :mod:`diffrep`."""


class IntegerOrder(DiffrepError, ValueError):
    """The fractional order is (numerically) a positive integer."""


class NonPositiveOrder(DiffrepError, ValueError):
    """The fractional order is not strictly positive."""


class OrderOutOfRange(DiffrepError, ValueError):
    """The order is valid but outside the range a routine supports."""


class PoleError(DiffrepError, ValueError):
    """Gamma function evaluated at a non-positive integer."""


class RangeError(DiffrepError, ValueError):
    """An integer parameter is outside its admissible range."""


class DomainError(DiffrepError, ValueError):
    """A point lies outside the (open) domain of a transformation."""


class UnsupportedTransform(DiffrepError, ValueError):
    """No quadrature construction is available for this transformation."""


class ToleranceNotMet(DiffrepError, ArithmeticError):
    """Adaptive quadrature exhausted its panel budget."""


class ConvergenceError(DiffrepError, ArithmeticError):
    """An iterative node computation failed to converge."""
