"""Exception hierarchy shared by every subsystem."""


class RsaaError(Exception):
    """Base class for all errors raised by rsaalab."""


class OutOfDomain(RsaaError, ValueError):
    """A point lies outside the objective's domain box."""


class DimensionTooLarge(RsaaError, ValueError):
    """A grid would exceed the configured node cap or supported dimension."""


class NonFiniteInput(RsaaError, ValueError):
    """An input grid function contains NaN or infinite values."""


class NoConvergence(RsaaError, RuntimeError):
    """An iterative eigensolver stopped before reaching its tolerance.

    Attributes
    ----------
    iterations : int
        Krylov steps performed.
    residuals : ndarray
        Best residual norms reached for each requested pair.
    """

    def __init__(self, message, iterations=0, residuals=None):
        super().__init__(message)
        self.iterations = iterations
        self.residuals = residuals


class BlockTooLarge(RsaaError, ValueError):
    """A separable block is too large for a dense grid eigensolve."""


class LinearSolveFailure(RsaaError, RuntimeError):
    """An inner linear solve in the time propagator missed its tolerance."""


class NonPositiveGap(RsaaError, ValueError):
    """A gap profile handed to the runtime functional contains a gap <= 0."""


class MissingMinimizer(RsaaError, ValueError):
    """The objective carries no known minimizer metadata."""


class BlockRecoveryFailed(RsaaError, RuntimeError):
    """Hessian-based block recovery could not certify a block structure."""


class ResolutionTooCoarse(RsaaError, ValueError):
    """Critical values collide within one grid value band."""


class NotAMorseSaddle(RsaaError, ValueError):
    """The Hessian at a putative saddle does not have exactly one negative eigenvalue."""


class ExpressionError(RsaaError, ValueError):
    """A custom function expression could not be parsed or evaluated."""
