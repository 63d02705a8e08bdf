"""Exception hierarchy.

Every domain error carries a stable machine-readable ``name`` (the class
name) which the command line reports on stderr.
"""


class FlatFlowError(Exception):
    """Base class for all domain errors."""

    @property
    def name(self) -> str:
        return type(self).__name__


# surface construction
class SurfaceError(FlatFlowError):
    pass


class MismatchedEdgeLengths(SurfaceError):
    pass


class InvalidGluing(SurfaceError):
    pass


class UnpairedEdge(SurfaceError):
    pass


class NonConvexPolygon(SurfaceError):
    pass


class ConeAngleNotMultipleOfPi(SurfaceError):
    pass


class ForbiddenConeAngle(SurfaceError):
    pass


class GenusTooSmall(SurfaceError):
    pass


class MismatchedBasePoint(FlatFlowError):
    pass


# cover and geodesics
class PatchBudgetExceeded(FlatFlowError):
    pass


class OutsideCertifiedRadius(FlatFlowError):
    pass


class Disconnected(FlatFlowError):
    pass


class MalformedPath(FlatFlowError):
    pass


class NotLocalGeodesic(FlatFlowError):
    pass


class BudgetExhausted(FlatFlowError):
    pass


# statistics
class InsufficientGrowthData(FlatFlowError):
    pass


class DegenerateRejectionLoop(FlatFlowError):
    pass


class EmptyExperiment(FlatFlowError):
    pass


class TooFewArcs(FlatFlowError):
    pass


class TooFewSamples(FlatFlowError):
    pass


# files
class SurfaceFileError(FlatFlowError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        where = f"line {line}: " if line is not None else ""
        super().__init__(where + message)


class SurfaceSyntaxError(SurfaceFileError):
    @property
    def name(self) -> str:
        return "SyntaxError"


class SchemaViolation(SurfaceFileError):
    pass


class DuplicateEdgeReference(SurfaceFileError):
    pass
