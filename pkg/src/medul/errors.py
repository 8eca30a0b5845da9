"""Exception hierarchy shared by all modules."""


class MedulError(Exception):
    """Base class for errors raised by this package."""


class DimensionMismatch(MedulError, ValueError):
    pass


class NotSPD(MedulError, ArithmeticError):
    """Cholesky factorization failed even after diagonal jitter."""


class EmptySample(MedulError, ValueError):
    pass


class InvalidW(MedulError, ValueError):
    """Weight w outside the open interval (0, 1)."""


class ParseError(MedulError, ValueError):
    def __init__(self, message, row=None, column=None):
        super().__init__(message)
        self.row = row
        self.column = column


class FormatVersionError(MedulError, ValueError):
    pass


class UndefinedConditional(MedulError, ValueError):
    """A conditional expectation was needed on a zero-probability event."""

    def __init__(self, message, entries=()):
        super().__init__(message)
        self.entries = list(entries)


class AssumptionViolated(MedulError, ValueError):
    pass


class NotSymmetric(MedulError, ValueError):
    pass


class DegenerateX(MedulError, ValueError):
    pass


class ConfigError(MedulError, ValueError):
    def __init__(self, message, key=None):
        super().__init__(message)
        self.key = key
