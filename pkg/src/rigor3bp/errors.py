"""Exception types shared across the package.

Verdict-like outcomes (an empty intersection, an inconclusive crossing) are
exceptions too, but callers in the proof pipeline catch them and turn them
into failed conditions rather than crashing.
"""


class Rigor3bpError(Exception):
    """Base class for all package errors."""


class DivByZeroInterval(Rigor3bpError, ZeroDivisionError):
    """Division by an interval that contains zero."""


class DomainError(Rigor3bpError, ValueError):
    """Elementary function evaluated outside its domain."""


class EmptyIntersection(Rigor3bpError):
    """Intersection of disjoint intervals."""


class SingularIntervalMatrix(Rigor3bpError):
    """An interval matrix whose determinant enclosure contains zero."""


class SingularityError(Rigor3bpError):
    """A box touches one of the primaries (collision singularity)."""


class NegativeDiscriminant(Rigor3bpError):
    """The point is not on the energy level of the requested section."""


class AmbiguousDiscriminant(Rigor3bpError):
    """The discriminant enclosure straddles zero; subdivide and retry."""


class ValidationFailed(Rigor3bpError):
    """A rough enclosure could not be validated."""


class DomainFailure(Rigor3bpError):
    """A Poincare map could not be shown to be well defined on a set."""


class NonTransversal(DomainFailure):
    """The vector field is not certified transversal to the section."""
