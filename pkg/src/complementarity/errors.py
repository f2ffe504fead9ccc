"""Exception types raised across the package."""


class StructuralError(ValueError):
    """Vectors that must share a regime axis have mismatched lengths, or a
    value violates a type-level invariant (negative loss, bad probability)."""


class BoundednessViolation(ValueError):
    """A combined loss lies outside the band spanned by the human and
    algorithm losses of its regime."""


class UnsupportedRuleError(ValueError):
    """The operation is undefined for the given weighting rule variant."""


class InfeasibleConstraints(ValueError):
    """A weight-optimization constraint set admits no solution.

    ``constraints`` names the pair of constraints found to be jointly
    unsatisfiable.
    """

    def __init__(self, message, constraints=()):
        super().__init__(message)
        self.constraints = tuple(constraints)


class ScenarioError(ValueError):
    """A scenario or sweep file failed to parse or validate."""
