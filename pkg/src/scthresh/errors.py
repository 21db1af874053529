"""Exception types shared across the package."""


class AnalysisError(Exception):
    """Base class for all errors raised by scthresh."""


class InvalidModelError(AnalysisError, ValueError):
    """A model was constructed with parameters outside its valid range."""


class ParameterError(AnalysisError, ValueError):
    """A numerical routine received an invalid tuning parameter."""


class NumericDomainError(AnalysisError, ArithmeticError):
    """A map produced a non-finite value (or left its domain)."""

    def __init__(self, message, x=None, epsilon=None):
        super().__init__(message)
        self.x = x
        self.epsilon = epsilon


class ShapeError(AnalysisError, ValueError):
    """A state vector does not have the length the configuration expects."""


class NonConvergenceError(AnalysisError, RuntimeError):
    """An iteration hit its budget; carries the last state and residual."""

    def __init__(self, message, state=None, residual=None, iterations=None):
        super().__init__(message)
        self.state = state
        self.residual = residual
        self.iterations = iterations


class DegenerateModelError(AnalysisError, ValueError):
    """A threshold is undefined for this model (e.g. f vanishes identically)."""
