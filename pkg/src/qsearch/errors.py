"""Exception hierarchy shared by every simulation module."""


class SearchError(Exception):
    """Base class for all package errors."""


class InvalidSpaceError(SearchError, ValueError):
    pass


class ShapeError(SearchError, ValueError):
    pass


class LayoutError(SearchError, ValueError):
    pass


class PromiseViolation(SearchError, ValueError):
    """A Boolean oracle does not satisfy the promise it was tagged with."""


class NoTargetError(SearchError, ValueError):
    pass


class DomainError(SearchError, ValueError):
    pass


class InvalidUnitaryError(SearchError, ValueError):
    pass


class InvalidOracleError(SearchError, ValueError):
    pass


class InfeasibleError(SearchError, RuntimeError):
    """The requested algorithm has no valid realization for these parameters."""


class NoSolutionError(InfeasibleError):
    pass


class DegenerateGeometryError(InfeasibleError):
    pass


class AccuracyError(SearchError, ArithmeticError):
    """A numerical invariant (norm, residual) was breached."""
