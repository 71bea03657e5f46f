"""Exception types shared across the package."""


class GravBCError(Exception):
    """Base class for all package errors."""


class InvalidParameterError(GravBCError, ValueError):
    pass


class DomainError(GravBCError, ValueError):
    pass


class ShapeError(GravBCError, ValueError):
    pass


class InvalidSpecError(GravBCError, ValueError):
    """A boundary-condition spec violates its coefficient invariants."""


class DegenerateSpecError(GravBCError, ValueError):
    """Boundary rows are rank deficient on one side of the slab."""

    def __init__(self, message, side=None):
        super().__init__(message)
        self.side = side


class DegenerateMetricError(GravBCError, ValueError):
    def __init__(self, message, lambdas=()):
        super().__init__(message)
        self.lambdas = tuple(lambdas)
