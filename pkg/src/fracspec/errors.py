"""Exception types shared across the solver modules."""


class FracspecError(Exception):
    """Base class for all package errors."""


class DomainError(FracspecError, ValueError):
    """An argument lies outside the mathematical domain of the operation."""


class AccuracyError(FracspecError, ArithmeticError):
    """A quadrature error estimate exceeded the configured tolerance."""


class ConvergenceError(FracspecError, ArithmeticError):
    """An iteration failed to contract or an eigensolver failed to converge."""


class BracketError(ConvergenceError):
    """Root bracketing found no sign change; reported instead of guessed."""
