"""Exception types raised by the engine.

Validation errors (bad input) derive from :class:`InputError`; the rest
signal a failed mathematical check.
"""


class HpcrisError(Exception):
    pass


class InputError(HpcrisError, ValueError):
    pass


class MathFailure(HpcrisError):
    """A mathematical identity that should hold did not."""


class CompositionNotZero(MathFailure):
    pass


class DifferentialNotSquareZero(InputError):
    pass


class ReducedDifferentialNotSquareZero(InputError):
    pass


class WeightViolation(InputError):
    pass


class DegreeViolation(InputError):
    pass


class UnknownGenerator(InputError):
    pass


class NotLiftOfSquareZero(InputError):
    pass


class LiftsNotCongruentModP(InputError):
    pass


class NotVerbatimLiftable(InputError):
    pass


class NotAModule(InputError):
    pass


class NotAnAlgebra(InputError):
    pass


class FiltrationNotStable(MathFailure):
    pass


class QuotientNotQ(MathFailure):
    pass


class ParseError(InputError):
    pass
