"""Exception and warning types.

Two families matter to callers: ``ValidationError`` (bad inputs, CLI exit 1)
and ``NumericalError`` (a computation could not meet its tolerance, CLI exit 2).
"""


class MustringError(Exception):
    """Base class for all package errors."""


class ValidationError(MustringError, ValueError):
    """Inputs violate a documented invariant or precondition."""


class NumericalError(MustringError, ArithmeticError):
    """A numerical procedure failed to reach its target accuracy."""


class InvalidParams(ValidationError):
    pass


class UnsolvableAlpha(ValidationError):
    """The measure-weight cubic has no root on the requested branch."""


class ParseError(ValidationError):
    def __init__(self, message, key=None, line=None):
        self.key = key
        self.line = line
        where = []
        if key is not None:
            where.append(f"key {key!r}")
        if line is not None:
            where.append(f"line {line}")
        super().__init__(f"{message} ({', '.join(where)})" if where else message)


class NotDifferentiable(ValidationError):
    pass


class NotInDomain(ValidationError):
    pass


class InsufficientSmoothness(ValidationError):
    pass


class InvalidLimit(ValidationError):
    pass


class CutoffMismatch(ValidationError):
    pass


class NotSpacelike(ValidationError):
    pass


class NoCrossing(ValidationError):
    pass


class QuadratureFailure(NumericalError):
    pass


class BracketFailure(NumericalError):
    def __init__(self, message, interval=None):
        self.interval = interval
        super().__init__(message if interval is None else f"{message} on {interval}")


class StepFailure(NumericalError):
    pass


class TraceVanishes(NumericalError):
    pass


class TruncationTooTight(NumericalError):
    pass


class TruncationWarning(UserWarning):
    pass


class TruncationOverflow(UserWarning):
    """Amplitude was pushed past the particle-number cutoff and dropped."""


class NonmonotoneWarning(UserWarning):
    pass
