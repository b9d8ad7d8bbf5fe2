"""Exception hierarchy."""


class AnadivError(Exception):
    """Base class for all package errors."""


class DomainError(AnadivError):
    pass


class NotStarShaped(DomainError):
    pass


class DegenerateBoundary(DomainError):
    pass


class RootFindFailure(DomainError):
    pass


class LengthMismatch(AnadivError, ValueError):
    pass


class JetError(AnadivError):
    pass


class BasePointMismatch(JetError, ValueError):
    pass


class OrderMismatch(JetError, ValueError):
    pass


class OrderExhausted(JetError):
    pass


class OutsideConvergence(JetError, ValueError):
    pass


class SourceTargetCoincide(JetError, ValueError):
    pass


class NumericalFailure(AnadivError):
    """Solver-level failure; the CLI maps these to exit status 3."""


class DegreeCap(NumericalFailure, ValueError):
    pass


class IllConditioned(NumericalFailure):
    pass


class IncompatibleFlux(NumericalFailure):
    def __init__(self, message, flux=None):
        super().__init__(message)
        self.flux = flux


class NonzeroMean(NumericalFailure):
    def __init__(self, message, mean=None, flux=None):
        super().__init__(message)
        self.mean = mean
        self.flux = flux


class TruncationTooSmall(AnadivError, ValueError):
    pass


class InsufficientOrders(AnadivError, ValueError):
    pass


class ConfigError(AnadivError, ValueError):
    """Malformed run configuration; exit status 2."""


class ToleranceViolation(AnadivError):
    """A computed residual exceeded its configured tolerance; exit status 4."""
