"""Exception hierarchy shared by every GraphEcho module."""


class GraphEchoError(Exception):
    """Base class; the CLI maps it to exit status 1."""


class GraphValidationError(GraphEchoError):
    """A metric graph violates its invariants."""

    def __init__(self, violations):
        self.violations = tuple(violations)
        super().__init__("invalid graph: " + "; ".join(self.violations))


class ParameterError(GraphEchoError, ValueError):
    pass


class FileFormatError(GraphEchoError):
    pass


class AmbiguousCountError(GraphEchoError):
    """Counting function queried within tolerance of an eigenvalue."""

    def __init__(self, k, distance):
        self.k = k
        self.distance = distance
        super().__init__(f"k={k!r} lies within tolerance of an eigenvalue (phase distance {distance:.3e})")


class SolverIncompleteError(GraphEchoError):
    pass


class BoundUndefinedError(GraphEchoError):
    pass


class InconsistentInputError(GraphEchoError):
    pass
