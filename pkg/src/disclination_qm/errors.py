"""Exception types raised across the package."""


class DisclinationError(Exception):
    """Base class for all package errors."""


class DomainError(DisclinationError, ValueError):
    """An argument lies outside the domain of the operation."""


class DegenerateConfinement(DisclinationError, ValueError):
    """No confining oscillator term (a = 0 and B = 0), hence no bound spectrum."""


class CaseDNeedsField(DegenerateConfinement):
    """The inverse-square case has bound states only for B > 0."""


class KinkPoint(DisclinationError, ValueError):
    """A flux derivative was requested at phi == ell where |ell - phi| has a kink."""


class ConvergenceFailure(DisclinationError, RuntimeError):
    """A quadrature could not reach its tolerance within the evaluation budget."""


class TailMassExceeded(ConvergenceFailure):
    """The momentum cutoff leaves more probability mass outside than allowed."""


class BracketingFailure(DisclinationError, RuntimeError):
    """Node-count bisection could not isolate the requested level."""


class GridTooCoarse(DisclinationError, RuntimeError):
    """Eigenvalues on N and 2N points disagree beyond the allowed margin."""


class NoConventionMatches(DisclinationError, RuntimeError):
    """No density convention reproduces the anchor rows closely enough."""

    def __init__(self, message, residuals=None):
        super().__init__(message)
        self.residuals = residuals or {}


class ThermoOverflow(DisclinationError, OverflowError):
    """The linear partition function is not representable as a float."""
