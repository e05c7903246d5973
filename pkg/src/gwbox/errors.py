"""Exception hierarchy shared by all gwbox modules."""


class GwboxError(Exception):
    """Base class for every error raised by gwbox."""


class InvalidBox(GwboxError, ValueError):
    pass


class NonPositiveSigma(GwboxError, ValueError):
    pass


class SigmaOutOfRange(GwboxError, ValueError):
    pass


class InvalidPerturbation(GwboxError, ValueError):
    pass


class EmptyInput(GwboxError, ValueError):
    pass


class ShapeMismatch(GwboxError, ValueError):
    pass


class MeanMismatch(GwboxError, ValueError):
    pass


class KTooSmall(GwboxError, ValueError):
    pass


class NonFiniteObjective(GwboxError, ArithmeticError):
    pass


class Diverged(GwboxError, ArithmeticError):
    pass


class DegenerateRanks(GwboxError, ValueError):
    """A variable is constant, so rank correlation is undefined."""


class NoneFound(GwboxError, LookupError):
    pass
