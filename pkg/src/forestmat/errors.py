"""Exception hierarchy.

Two families matter to callers (and to the CLI exit codes): ``DataError`` for
inputs that violate a precondition, and ``NumericalError`` for results the
engine refuses to vouch for.
"""

from __future__ import annotations


class ForestMatError(Exception):
    """Base class for every error raised by this package."""


class DataError(ForestMatError, ValueError):
    pass


class NumericalError(ForestMatError, ArithmeticError):
    pass


# graph construction
class LoopArc(DataError):
    pass


class NonpositiveWeight(DataError):
    pass


class VertexOutOfRange(DataError):
    pass


class TooFewVertices(DataError):
    pass


class BasisCountOverflow(DataError):
    pass


class DegenerateTriple(DataError):
    pass


class NotStronglyConnected(DataError):
    pass


class NotASourceKnot(DataError):
    pass


class EnumerationCapExceeded(DataError):
    pass


class GraphTooLargeForConvexity(DataError):
    pass


class WeightAboveOne(DataError):
    pass


# forest calculus
class IndexBeyondMaxForest(DataError):
    pass


class ZeroSigma(NumericalError):
    pass


class AlphaOutOfBounds(DataError):
    pass


class UndefinedBound(DataError):
    pass


class NumericalBreakdown(NumericalError):
    pass


# markov chains
class AlphaTooLarge(DataError):
    pass


class NotConverged(NumericalError):
    pass


# edge-list parsing
class ParseError(DataError):
    def __init__(self, message: str, line: int, column: int = 1):
        super().__init__(f"line {line}, column {column}: {message}")
        self.line = line
        self.column = column


class DuplicateHeader(ParseError):
    pass


class MissingHeader(ParseError):
    pass
