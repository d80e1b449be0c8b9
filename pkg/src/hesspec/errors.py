"""Exception hierarchy shared across the solver modules."""


class HesspecError(Exception):
    """Base class for all library-specific failures."""


class DomainError(HesspecError, ValueError):
    """Invalid argument (non-finite input, bad label, c <= 0, ...)."""


class ConfigError(HesspecError, ValueError):
    """Malformed or inconsistent configuration input."""


class NumericError(HesspecError, RuntimeError):
    """Generic numerical failure (eigensolver breakdown etc.)."""


class PoleError(NumericError):
    """1 + g*delta vanished at a quadrature node; z is in or too near the spectrum."""

    def __init__(self, message, node=None):
        super().__init__(message)
        self.node = node


class NonConvergence(NumericError):
    """Fixed-point iteration failed to reach tolerance."""

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class BranchViolation(NumericError):
    """Converged to the wrong branch of the Stieltjes transform."""


class ImaginaryLeak(NumericError):
    """A quantity expected to be real carried a non-negligible imaginary part."""


class MultiplicityViolation(NumericError):
    """Zero eigenvalue of the spike matrix is not simple."""
