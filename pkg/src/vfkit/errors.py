"""Exception hierarchy.

Errors split into two families so the CLI can map them to exit codes:
:class:`InputError` for malformed or inconsistent input, and
:class:`NumericalError` for breakdowns in the numerics.
"""


class VfkitError(Exception):
    """Base class of all vfkit errors."""


class InputError(VfkitError, ValueError):
    pass


class NumericalError(VfkitError, ArithmeticError):
    pass


class InvalidParam(InputError):
    pass


class InvalidBand(InvalidParam):
    pass


class LengthMismatch(InputError):
    pass


class EmptySet(InputError):
    pass


class GridMismatch(InputError):
    pass


class TooFewSamples(InputError):
    pass


class MissingDerivative(InputError):
    pass


class NotPairable(InputError):
    pass


class DuplicatePoles(InputError):
    pass


class PoleCollision(NumericalError):
    """Evaluation point coincides with a pole (or a barycentric node)."""


class DenominatorZero(NumericalError):
    pass


class SingularResolvent(NumericalError):
    pass


class RankDeficient(NumericalError):
    pass


class NonGenericTls(NumericalError):
    """The smallest singular value is multiple or its vector has a zero tail."""


class DegenerateDenominator(NumericalError):
    pass


class ZeroNorm(NumericalError):
    pass


class DivByZero(NumericalError, ZeroDivisionError):
    pass
