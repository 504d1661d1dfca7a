"""
Error Types
Exception hierarchy shared by every thin-traces module
"""


class ThinTracesError(Exception):
    """Base class for all library errors"""


class ValidationError(ThinTracesError, ValueError):
    """Input rejected before any computation started"""


class BudgetExceededError(ThinTracesError, RuntimeError):
    """A size guard refused the computation"""

    def __init__(self, message, estimate=None, cap=None):
        if estimate is not None and cap is not None:
            message = f"{message} (estimate {estimate:,.0f} > cap {cap:,.0f})"
        super().__init__(message)
        self.estimate = estimate
        self.cap = cap


class ConvergenceError(ThinTracesError, ArithmeticError):
    """An iteration or quadrature did not reach its tolerance"""
