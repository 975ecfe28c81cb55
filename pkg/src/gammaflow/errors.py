"""Exception hierarchy shared by every module."""


class GammaFlowError(Exception):
    """Base class for all package errors."""


class DomainError(GammaFlowError, ValueError):
    """An argument lies outside the domain of the requested operation."""


class DegenerateGrid(GammaFlowError, ValueError):
    """A grid is too small for the finite-difference stencils."""


class NotATranslator(GammaFlowError):
    """Data fails the translator equation beyond the declared tolerance."""


class ConeExit(GammaFlowError):
    """Principal curvatures left the closure of the admissible cone."""

    def __init__(self, message, index=None, lam=None):
        super().__init__(message)
        self.index = index
        self.lam = lam


class Instability(GammaFlowError):
    """The explicit time stepper blew up."""


class RootBracketFailure(GammaFlowError):
    """No sign change was found for a bracketed root solve."""

    def __init__(self, message, interval=None):
        super().__init__(message)
        self.interval = interval


class StepTooLarge(GammaFlowError):
    """The local error estimate of a fixed-step integrator exceeded tolerance."""


class InterpolationRange(GammaFlowError, ValueError):
    """Interpolation was requested outside the solved abscissa."""
