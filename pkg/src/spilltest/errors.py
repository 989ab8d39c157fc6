"""Exception types raised across the package.

Everything derives from SpillTestError; most also subclass ValueError so
callers that only know stdlib idioms still catch what they expect.
"""

from __future__ import annotations


class SpillTestError(Exception):
    """Base class for all errors raised by spilltest."""


class OutOfRangeVertex(SpillTestError, ValueError):
    """A vertex index falls outside [0, n)."""


class SelfLoop(SpillTestError, ValueError):
    """An edge (i, i) was supplied; simple graphs forbid self-loops."""


class LengthMismatch(SpillTestError, ValueError):
    """A per-vertex vector does not match the graph's vertex count."""


class NotABijection(SpillTestError, ValueError):
    """A vertex permutation does not visit every label exactly once."""


class ParseError(SpillTestError, ValueError):
    """A text input failed to parse; carries the offending line number."""

    def __init__(self, message: str, line_no: int | None = None):
        if line_no is not None:
            message = f"line {line_no}: {message}"
        super().__init__(message)
        self.line_no = line_no


class InvalidProbability(SpillTestError, ValueError):
    """A probability parameter lies outside [0, 1]."""


class InvalidCount(SpillTestError, ValueError):
    """A count parameter is negative or exceeds its allowed range."""


class TooManyEdges(SpillTestError, ValueError):
    """Requested edge count exceeds the number of vertex pairs."""


class TooFewVertices(SpillTestError, ValueError):
    """The operation needs a larger graph (e.g. edge-density MLE needs n >= 2)."""


class InvalidSpec(SpillTestError, ValueError):
    """A generator or design specification violates its invariants."""


class DegenerateGraph(SpillTestError, ValueError):
    """The graph cannot support the requested computation (e.g. no edges)."""


class EmptyInput(SpillTestError, ValueError):
    """A nonempty collection was required."""


class TooLargeForEnumeration(SpillTestError, ValueError):
    """Exhaustive enumeration was requested beyond its size guard."""


class ObservedStatisticUndefined(SpillTestError, ValueError):
    """The observed test statistic is undefined on the supplied data."""


class ExcessiveDegeneracy(SpillTestError, RuntimeError):
    """Too many null draws produced an undefined statistic (> 10%)."""
