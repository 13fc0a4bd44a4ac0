"""Exception hierarchy."""


class SpindecError(Exception):
    """Base class for all errors raised by spindec."""


class DomainError(SpindecError, ValueError):
    """An argument lies outside the domain of the operation."""


class SingularityError(SpindecError, ArithmeticError):
    """A reflection-coefficient denominator vanished (guided-mode pole)."""


class QuadratureError(SpindecError, ArithmeticError):
    """Adaptive quadrature ran out of budget before reaching tolerance.

    The partial estimate and its report are kept on the exception.
    """

    def __init__(self, message, partial=None, report=None):
        super().__init__(message)
        self.partial = partial
        self.report = report


class BracketError(SpindecError, ValueError):
    """No sign change inside the root-finding bracket."""

    def __init__(self, message, bracket=None, values=None):
        super().__init__(message)
        self.bracket = bracket
        self.values = values


class ConfigError(SpindecError, ValueError):
    """Invalid run configuration."""
