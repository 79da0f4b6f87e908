"""Exception and warning types shared across the package."""


class CrosstalkError(Exception):
    """Base class for all package errors."""


class DomainError(CrosstalkError, ValueError):
    """A wave vector, separation or parameter lies outside its allowed domain."""


class OutOfBandError(CrosstalkError, ValueError):
    """The probe frequency does not intersect the bath band."""


class ResolutionError(CrosstalkError, RuntimeError):
    """A quadrature grid is too coarse for the requested accuracy.

    Attributes
    ----------
    suggested : int or None
        A grid size (nodes per axis) expected to satisfy the check.
    """

    def __init__(self, message, suggested=None):
        super().__init__(message)
        self.suggested = suggested


class InvalidCoefficientsError(CrosstalkError, ValueError):
    """Damping coefficients do not define a completely positive generator."""


class StepSizeError(CrosstalkError, ValueError):
    """Integration step violates the stability bound."""


class EigensolverError(CrosstalkError, RuntimeError):
    """Eigendecomposition of a chain matrix failed."""


class InvariantViolation(CrosstalkError, AssertionError):
    """An internal consistency check failed."""


class DegenerateManifoldWarning(RuntimeWarning):
    """Resonant manifold touches a critical point where the group velocity vanishes."""


class WeakCouplingWarning(UserWarning):
    """Coupling is too strong for the Born-Markov treatment to be trusted."""


class IllConditionedWarning(RuntimeWarning):
    """A normalization divides by a quantity close to zero."""
