"""Exception types shared across the package."""


class InvalidInputError(ValueError):
    """Raised when caller-supplied data violates a documented precondition."""


class NumericFailure(RuntimeError):
    """Raised when an iterative numerical routine fails to converge.

    Carries enough context to diagnose the failure: ``detail`` is a dict of
    solver-specific quantities (bracketing interval, residual, iteration
    count), and ``partial`` optionally holds the best result obtained so far
    so callers can fall back without re-solving.
    """

    def __init__(self, message, detail=None, partial=None):
        super().__init__(message)
        self.detail = dict(detail or {})
        self.partial = partial
