"""Exception types shared across the package."""


class ParameterError(ValueError):
    """Invalid argument value (domain violation, unsupported option)."""


class ConfigError(ValueError):
    """Malformed or inconsistent run configuration."""


class AssemblyError(RuntimeError):
    """Assembly produced an unusable system (e.g. a floating structure)."""


class SolverError(RuntimeError):
    """Base class for linear and eigenvalue solver failures."""


class IndefiniteMatrixError(SolverError):
    """An SPD factorization met a non-positive pivot."""


class ConvergenceError(SolverError):
    """Iteration failed to reach the requested tolerance."""

    def __init__(self, message, best_residual=None):
        super().__init__(message)
        self.best_residual = best_residual


class NoBucklingModeError(SolverError):
    """The geometric operator has no direction of positive energy."""


class DegenerateVectorError(ValueError):
    """A vector of (numerically) zero energy cannot be normalized."""


class EnrichmentError(ValueError):
    """A dual space must be strictly richer than the primal space."""


class UndefinedEffectivityError(ArithmeticError):
    """Effectivity index is undefined when the true error vanishes."""
