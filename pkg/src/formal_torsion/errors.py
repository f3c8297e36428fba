"""Exception hierarchy shared by every module."""


class FormalTorsionError(Exception):
    """Base class for all library errors."""


class ContextMismatch(FormalTorsionError):
    """Operands belong to different prime configurations or rings."""


class NonUnit(FormalTorsionError):
    """Inversion requested for an element that is not a unit."""


class IndeterminatePrecision(FormalTorsionError):
    """A decision would depend on a value known only as a lower bound."""


class TruncationExceeded(FormalTorsionError):
    """An operation needs series information beyond the truncation degree."""


class ShapeMismatch(FormalTorsionError):
    """Series with different variable counts or truncation degrees were combined."""


class SingularReduction(FormalTorsionError):
    """The Weierstrass discriminant is not a unit, so the reduction is singular."""


class InfiniteHeightComponent(FormalTorsionError):
    """A [p]-series component has no unit coefficient up to the truncation degree."""

    def __init__(self, index, message=None):
        self.index = index
        super().__init__(message or f"component {index} has no unit-coefficient monomial within the truncation")


class NonPPowerDegree(FormalTorsionError):
    """The minimal unit degree of a component is not a power of p."""

    def __init__(self, index, degree):
        self.index = index
        self.degree = degree
        super().__init__(f"component {index}: minimal unit degree {degree} is not a power of p")


class NoUnitCoefficient(FormalTorsionError):
    """A univariate series has no unit coefficient up to its truncation degree."""


class EnumerationBudgetExceeded(FormalTorsionError):
    """Brute-force search would enumerate more points than allowed."""


class LiftDiverged(FormalTorsionError):
    """Hensel lifting never met its convergence criterion."""


class UnsupportedDimension(FormalTorsionError):
    """Root analysis requested for a group outside the dim-1 / product regime."""


class NotStrict(FormalTorsionError):
    """A strict formal group was required."""


class EmbeddingResidual(FormalTorsionError):
    """A proposed embedding is not a root of the Eisenstein polynomial to precision."""


class DegenerateTransform(FormalTorsionError):
    """A coordinate change killed every unit coefficient of some form."""


class SpecError(FormalTorsionError):
    """A run specification failed to parse or validate."""
