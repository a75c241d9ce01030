"""Exception hierarchy shared by all modules."""


class GeometryError(Exception):
    """Base class for every error raised by this package."""


class CoincidentSites(GeometryError):
    pass


class NearTangency(GeometryError):
    pass


class OffCurve(GeometryError):
    pass


class SiteAboveLine(GeometryError):
    pass


class QueryBelowLine(GeometryError):
    pass


class EmptyInput(GeometryError):
    pass


class DegenerateTangency(GeometryError):
    """Contour root coincides with an l-edge endpoint (needs re-perturbation)."""


class TraceStall(GeometryError):
    """Contour tracing lost consistency (needs re-perturbation)."""


class EmptyStructure(GeometryError):
    pass


class QueryBeforeAnyInsert(GeometryError):
    pass


class UnknownSource(GeometryError):
    pass


class NotSeparated(GeometryError):
    pass


class ParseError(GeometryError):
    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


# Failures that a fresh perturbation of the input is expected to cure.
RETRYABLE = (DegenerateTangency, TraceStall, NearTangency)
