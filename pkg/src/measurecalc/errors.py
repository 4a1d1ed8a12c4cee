"""Exception hierarchy.

Domain errors derive from :class:`MeasureError`; problem-file and expression
parsing errors derive from :class:`ProblemError`.  The CLI maps the first
family to exit status 1 and the second to exit status 2.
"""


class MeasureError(Exception):
    """Base class for every domain error raised by the library."""


class ProblemError(Exception):
    """Base class for malformed input (problem files, expressions)."""

    def __init__(self, message, location=None):
        self.location = location
        if location is not None:
            message = f"{location}: {message}"
        super().__init__(message)


# space construction
class EmptySpace(MeasureError):
    pass


class NonpositiveVolume(MeasureError):
    pass


class DuplicateLabel(MeasureError):
    pass


class NonincreasingEdges(MeasureError):
    pass


class NonpositiveEdge(MeasureError):
    pass


class ForeignCellSet(MeasureError):
    """A cell set (or cell index) does not belong to the space it is used with."""


class SpaceMismatch(MeasureError):
    pass


# measure algebra
class InvalidDensity(MeasureError):
    pass


class NotProbability(MeasureError):
    pass


class EmptySetRenormalize(MeasureError):
    pass


class ZeroOverlap(MeasureError):
    """Intersection normalisation constant is zero."""


class ZeroProbabilityConditioning(MeasureError):
    pass


class ZeroPullbackMass(MeasureError):
    pass


# sampling
class ZeroMassSampling(MeasureError):
    pass


class AttemptBudgetExhausted(MeasureError):
    pass


class UnboundedLikelihood(MeasureError):
    pass


class ZeroAcceptance(MeasureError):
    pass


class EmptyCloud(MeasureError):
    pass


class MappingDomainError(MeasureError):
    """A forward map is undefined at some input.

    ``index`` is the position of the first offending particle when the map
    was evaluated over a cloud, otherwise ``None``.
    """

    def __init__(self, message, index=None):
        self.index = index
        if index is not None:
            message = f"{message} (particle {index})"
        super().__init__(message)


# inference
class ZeroEvidence(MeasureError):
    pass


class InconsistentOracles(MeasureError):
    pass


# parsing
class ExprSyntaxError(ProblemError):
    def __init__(self, message, position):
        self.position = position
        super().__init__(message, location=f"col {position + 1}")


class UnboundVariable(ProblemError):
    pass


class ProblemSyntaxError(ProblemError):
    pass


class UnknownKey(ProblemError):
    pass


class UnresolvedReference(ProblemError):
    pass


class SchemaViolation(ProblemError):
    pass
