"""Exception hierarchy shared by every module."""


class XpError(Exception):
    """Base class for all errors raised by xpmodels."""


class DomainError(XpError, ValueError):
    """An argument lies outside the domain where the operation is defined."""


class UsageError(XpError, ValueError):
    """The caller asked for something the operation does not support."""


class UnsupportedModelError(UsageError):
    pass


class ClassicallyForbiddenError(DomainError):
    """|E| < 2 w(x): no real momentum exists at this point."""


class NoOrbitError(DomainError):
    """The energy lies below the classical minimum of the model."""


class ConvergenceError(XpError, ArithmeticError):
    """An iterative method gave up; ``estimate`` carries its best answer."""

    def __init__(self, message, estimate=None, error=None):
        super().__init__(message)
        self.estimate = estimate
        self.error = error


class IntegrationError(XpError, ArithmeticError):
    """ODE integration failed; carries the last accepted point."""

    def __init__(self, message, last_t=None, last_y=None):
        super().__init__(message)
        self.last_t = last_t
        self.last_y = last_y


class DivergentMapError(XpError, ArithmeticError):
    """The integral defining a coordinate map diverges at the lower end."""


class IngestionError(XpError, ValueError):
    """A data file could not be parsed; ``line`` is 1-based."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line
