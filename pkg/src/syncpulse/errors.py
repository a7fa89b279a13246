"""Exception hierarchy shared by all modules."""


class SyncPulseError(Exception):
    """Base class for every error raised by the package."""


class DomainError(SyncPulseError, ValueError):
    """An argument lies outside the domain of the operation (NaN, inf, negative width...)."""


class PreconditionError(SyncPulseError, ValueError):
    """A documented precondition was violated, e.g. evaluation before the last pulse."""


class UnsupportedMethodError(SyncPulseError, ValueError):
    """The requested evaluation route does not exist for this spectral family."""


class ConvergenceError(SyncPulseError, ArithmeticError):
    """Numerical procedure ran out of budget.

    The best available estimate and its error are attached so callers can
    decide whether to use them anyway.
    """

    def __init__(self, message, estimate=float("nan"), error=float("inf")):
        super().__init__(message)
        self.estimate = estimate
        self.error = error


class FlatBracketError(SyncPulseError, ValueError):
    """No interior maximum with sufficient prominence inside the search bracket."""


class EnvelopeError(SyncPulseError):
    """The correlation envelope could not be extracted (too few peaks, zero crossings)."""
