"""Exception types raised across the package."""


class HarmvalError(Exception):
    """Base class for all package errors."""


class NonFiniteInput(HarmvalError, ValueError):
    pass


class ConstantPolynomial(HarmvalError, ValueError):
    pass


class DegenerateElimination(HarmvalError):
    """One of the two eliminated polynomials has no dependence on w."""


class NonIsolatedZeroSet(HarmvalError):
    """The zero set of the field is not a finite set of points."""


class LeadingPartVanishes(HarmvalError):
    """The top-degree part of the field vanishes somewhere on the unit sphere."""


class ZeroOnContour(HarmvalError):
    """A winding contour passes through (or numerically touches) a zero."""


class IrregularInstance(HarmvalError):
    pass


class DegenerateDraw(HarmvalError):
    pass
