"""Exception hierarchy shared by every module."""

from __future__ import annotations


class RigidityError(Exception):
    """Base class for all library errors."""


class ModelMismatchError(RigidityError, TypeError):
    """A point or vector was handed to a model it does not belong to."""


class PreconditionError(RigidityError, ValueError):
    """An operation was called outside the regime where it is defined."""


class CutLocusError(PreconditionError):
    """A log map or sphere parameterization was requested at or beyond inj(x)."""


class ConvergenceError(RigidityError):
    """An iterative solver stopped before reaching its tolerance.

    ``bracket`` holds whatever interval the solver had narrowed down to.
    """

    def __init__(self, message: str, bracket: tuple[float, float] | None = None):
        super().__init__(message)
        self.bracket = bracket


class DiagnosticsError(RigidityError):
    """Numerical evidence contradicts a structural guarantee (e.g. monotonicity)."""


class RefinementError(RigidityError):
    """An interval comparison cannot be decided at the available precision."""


class FieldMismatchError(RigidityError, ValueError):
    """Arithmetic mixed two different quadratic fields."""


class ParameterError(RigidityError, ValueError):
    """A construction parameter lies outside its admissible range."""


class DerivationError(RigidityError):
    """A closure derivation ended without a certificate.

    ``partial`` is the certificate built so far (its ``achieved`` value is not
    below epsilon).
    """

    def __init__(self, message: str, partial=None):
        super().__init__(message)
        self.partial = partial


class BudgetExhaustedError(DerivationError):
    """The step budget ran out before a distance below epsilon was derived."""


class RationalityReport(DerivationError):
    """The seeds are commensurable: the Euclidean algorithm reached zero.

    This is a definite outcome, not a numerical failure. It means the
    derivation can only ever produce rational multiples of a common unit.
    """
