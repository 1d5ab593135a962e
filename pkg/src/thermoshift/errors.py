"""Exception types raised across the package."""


class ThermoshiftError(Exception):
    """Base class for all package errors."""


class InvalidMatrix(ThermoshiftError, ValueError):
    """A raw table does not define a usable transition matrix."""


class NotSquare(InvalidMatrix):
    pass


class NotZeroOne(InvalidMatrix):
    pass


class TooSmall(InvalidMatrix):
    pass


class NotIrreducible(InvalidMatrix):
    pass


class IsPermutation(InvalidMatrix):
    pass


class NotAdmissible(ThermoshiftError, ValueError):
    pass


class WordTooShort(ThermoshiftError, ValueError):
    pass


class DepthTooSmall(ThermoshiftError, ValueError):
    pass


class NotDecodable(ThermoshiftError, ValueError):
    pass


class NoConvergence(ThermoshiftError, ArithmeticError):
    """An iterative method hit its iteration cap."""


class NoBracket(ThermoshiftError, ArithmeticError):
    """Root finding could not locate a sign change."""
