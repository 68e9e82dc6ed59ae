"""Exception types raised by the numerical routines."""


class NHDecayError(Exception):
    """Base class for package errors."""


class UnderResolvedError(NHDecayError, ValueError):
    """A geometric query could not be decided on the current k-grid."""


class OnLoopError(NHDecayError, ValueError):
    """Energy lies on the loop, where the self-energy is discontinuous."""


class OnCutError(NHDecayError, ValueError):
    """Energy lies on a branch cut of the continued self-energy."""


class ConvergenceError(NHDecayError, RuntimeError):
    """An iterative procedure did not reach its tolerance.

    ``achieved`` carries the last error estimate when one is available.
    """

    def __init__(self, message, achieved=None):
        super().__init__(message)
        self.achieved = achieved


class SaddleSearchError(ConvergenceError):
    """No seed of the saddle search converged."""


class RegimeError(NHDecayError, ValueError):
    """Operation not defined in this hopping regime."""
