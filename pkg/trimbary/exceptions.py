"""Exception hierarchy for trimmed Wasserstein clustering."""

from __future__ import annotations


class TrimbaryError(Exception):
    """Base class for every error raised by the library."""

    exit_code = 1


class InputError(TrimbaryError, ValueError):
    """The caller passed data that violates an operation's contract."""

    exit_code = 2


class DimensionMismatchError(InputError):
    """Operands live in spaces of different dimension."""


class GridMismatchError(InputError):
    """Quantile functions are sampled on grids of different size."""


class MixedGeometryError(InputError, TypeError):
    """Gaussian and quantile distributions were mixed in one operation."""


class NotPositiveSemidefiniteError(InputError):
    """A covariance matrix has a genuinely negative eigenvalue."""


class InvalidConfigError(InputError):
    """Solver, engine or bound parameters are out of range."""


class EmptySampleError(InputError):
    """An operation received no observations."""


class InfeasibleSplitError(InputError):
    """A sample cannot be split into units of the requested size."""


class UndefinedWeightError(InputError):
    """A consensus center has no untrimmed feature to average weights over."""


class InconsistentSolutionError(InputError):
    """A solution does not belong to the distribution set it is checked against."""


class NumericalError(TrimbaryError):
    """An iterative numerical routine failed."""

    exit_code = 3


class EigenDecompositionError(NumericalError):
    """The symmetric eigensolver did not converge."""


class BarycenterConvergenceError(NumericalError):
    """The covariance fixed-point iteration stopped above tolerance."""

    def __init__(self, message: str, *, residual: float, iterations: int) -> None:
        super().__init__(message)
        self.residual = residual
        self.iterations = iterations


class DegenerateBarycenterError(NumericalError):
    """Every weighted covariance is singular, so no PD start exists."""


class FitError(NumericalError):
    """The clustering engine failed on every restart."""
