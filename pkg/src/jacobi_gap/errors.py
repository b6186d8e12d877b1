"""Exception types raised across the package."""


class JacobiGapError(Exception):
    """Base class for all package errors."""


class DomainError(JacobiGapError, ValueError):
    """An argument lies outside the domain where an operation is defined."""


class SingularRhs(JacobiGapError, ArithmeticError):
    """The Painleve right-hand side left its real branch (or h' hit zero).

    ``t`` records where the failure was detected.
    """

    def __init__(self, message, t=None):
        super().__init__(message)
        self.t = t


class StepFailure(JacobiGapError, RuntimeError):
    """The adaptive integrator could not take a step above the minimum size."""

    def __init__(self, message, t_last=None):
        super().__init__(message)
        self.t_last = t_last


class RecursionStall(JacobiGapError, ArithmeticError):
    """The series coefficient polynomial p_k(X) had no usable rational root."""

    def __init__(self, message, k=None):
        super().__init__(message)
        self.k = k


class EnvelopeViolation(JacobiGapError, RuntimeError):
    """A proposal's density exceeded the rejection-sampling envelope."""


class GlueFailure(JacobiGapError, RuntimeError):
    """No seam with a small enough jump exists between two solution pieces."""


class BreakdownWarning(UserWarning):
    """Parameters lie where the Runge-Kutta method is known to fail (a > 0)."""
