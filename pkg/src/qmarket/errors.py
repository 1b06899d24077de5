"""Exception hierarchy shared by every qmarket module."""


class QMarketError(Exception):
    """Base class for all library errors."""


class DomainError(QMarketError, ValueError):
    """A parameter lies outside the domain where the operation is defined."""


class DegenerateState(QMarketError, ArithmeticError):
    """A state has zero (or underflowing) norm."""


class ConvergenceError(QMarketError, RuntimeError):
    """An iterative or spectral computation missed its residual target."""


class GridTooSmall(QMarketError, RuntimeError):
    """The grid cannot hold the requested state to the required tail mass."""


class GridTooSmallWarning(UserWarning):
    """Non-fatal variant of GridTooSmall, raised through ``warnings``."""


class IoError(QMarketError, OSError):
    """Writing an output artifact failed."""
