"""Exception types shared across the package."""


class RmtqError(Exception):
    """Base class for all package errors."""


class InputError(RmtqError):
    """Invalid argument: dimension mismatch, wrong domain, missing data."""


class ConfigError(RmtqError):
    """Malformed or unknown experiment configuration."""


class ConvergenceError(RmtqError):
    """An iterative solver failed to reach its tolerance."""

    def __init__(self, message: str, residual: float | None = None):
        super().__init__(message)
        self.residual = residual


class ContinuationError(RmtqError):
    """Real-axis continuation of the self-consistent equation failed."""


class BranchLossError(RmtqError):
    """The square-root branch of the sigma ODE was lost during integration."""

    def __init__(self, message: str, t: float | None = None):
        super().__init__(message)
        self.t = t


class StepSizeError(RmtqError):
    """Adaptive SDE stepping could not maintain eigenvalue ordering."""


class StabilitySingularError(RmtqError):
    """Two-resolvent stability factor below the usable threshold."""


class RejectedSampleError(RmtqError):
    """A single observation was rejected (e.g. vanishing density at a gap)."""
