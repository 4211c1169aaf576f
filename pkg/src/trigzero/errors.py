"""Exception types shared across the package."""


class TrigZeroError(Exception):
    """Base class for all package errors."""


class ValidationError(TrigZeroError, ValueError):
    """An argument violates a documented precondition."""


class Degenerate(TrigZeroError, ArithmeticError):
    """The Gaussian field has vanishing variance; Kac-Rice does not apply."""


class SingularPoint(TrigZeroError, ArithmeticError):
    """Evaluation requested at an excluded singular point."""


class NotConverged(TrigZeroError, ArithmeticError):
    """An adaptive computation exhausted its budget before reaching tolerance."""

    def __init__(self, message, estimate=None, error=None):
        super().__init__(message)
        self.estimate = estimate
        self.error = error


class FactorizationFailed(TrigZeroError, ArithmeticError):
    """A covariance matrix is not positive semidefinite."""


class IllConditioned(TrigZeroError, ArithmeticError):
    """A polynomial draw is too degenerate for companion-matrix rooting."""


class NotFound(TrigZeroError, LookupError):
    """A search over integers produced no qualifying candidate."""


class MeasureFileError(ValidationError):
    """A measure specification file is malformed.

    ``line`` is the 1-based line of the offending entry when it can be located.
    """

    def __init__(self, message, line=None, source="<measure>"):
        self.line = line
        self.source = source
        where = f"{source}:{line}: " if line is not None else f"{source}: "
        super().__init__(where + message)
