"""Exception types shared across the package."""

__all__ = [
    "TempoSimError",
    "SvdConvergenceError",
    "ContractShapeError",
    "QuadratureError",
    "ClassConsistencyError",
    "NumericalBlowupError",
    "FitWindowError",
    "ExtrapolationError",
    "ConfigError",
]


class TempoSimError(Exception):
    """Base class for all package-specific errors."""


class SvdConvergenceError(TempoSimError):
    """An SVD failed to converge or received non-finite input."""


class ContractShapeError(TempoSimError):
    """Tensor legs do not match for the requested contraction."""


class QuadratureError(TempoSimError):
    """Adaptive quadrature did not reach the requested tolerance."""

    def __init__(self, message, achieved=None):
        super().__init__(message)
        self.achieved = achieved


class ClassConsistencyError(TempoSimError):
    """Members of one degeneracy class produced different tensor rows."""


class NumericalBlowupError(TempoSimError):
    """A propagated state exceeded the divergence guard threshold."""

    def __init__(self, message, step=None, relative_cutoff=None):
        super().__init__(message)
        self.step = step
        self.relative_cutoff = relative_cutoff


class FitWindowError(TempoSimError):
    """The requested fit window contains unusable data."""


class ExtrapolationError(TempoSimError):
    """Not enough well-conditioned points for the requested fit."""


class ConfigError(TempoSimError):
    """A configuration file or value is invalid."""
