"""Exception types shared across the package."""


class TailabError(Exception):
    """Base class for all package errors."""


class InvalidSample(TailabError):
    """Sample violates basic requirements (empty, negative values, ...)."""


class InsufficientTailData(TailabError):
    """Too few upper order statistics to fit a tail estimate."""


class DegenerateTail(TailabError):
    """Ties in the upper order statistics make the estimator undefined."""


class BoundNotApplicable(TailabError):
    """Requested transform argument lies outside the finite region."""


class NotAContraction(TailabError):
    """Asymptotic slope of the map is not strictly below one."""


class DomainError(TailabError):
    """Argument outside the admissible domain of a utility family."""


class SolverError(TailabError):
    """Root bracketing or refinement failed."""


class AssumptionViolated(TailabError):
    """A maintained assumption of the operation does not hold."""


class NotGrowing(TailabError):
    """Requested a growth-driven tail for a type whose wealth does not grow."""
