"""Exception types shared across the package."""


class CollideError(Exception):
    """Base class for all package errors."""


class InvalidDistributionError(CollideError, ValueError):
    """A distribution or model spec violates its invariants."""


class InvalidParamsError(CollideError, ValueError):
    """Limit-law parameters are outside the admissible region."""


class RunawayTrialError(CollideError, RuntimeError):
    """A trial exceeded the per-trial draw cap without terminating.

    Raised distinctly so that misconfigured models (e.g. colors with
    disjoint urn supports, where a collision is impossible) surface
    loudly instead of degrading into silence.
    """


class NumericFailureError(CollideError, ArithmeticError):
    """A quadrature or linear solve failed to reach its tolerance."""
