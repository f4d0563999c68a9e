"""Exception hierarchy.

The CLI maps the three families below onto exit codes: input problems (1),
numerical failures (3) and violated mathematical hypotheses (4).  A missing
magnitude weighting is data for the library and only becomes ``NoWeighting``
where an operation cannot proceed without one (exit 2).
"""


class MaggeomError(Exception):
    """Base class for every error raised by this package."""


# -- malformed input -------------------------------------------------------

class InvalidInput(MaggeomError, ValueError):
    pass


class InvalidMatrix(InvalidInput):
    pass


class NotUnitDiagonal(InvalidMatrix):
    pass


class InvalidMetric(InvalidInput):
    pass


class DisconnectedGraph(InvalidMetric):
    pass


# -- numerical failure -----------------------------------------------------

class NumericalFailure(MaggeomError, ArithmeticError):
    pass


class EigenNonConvergence(NumericalFailure):
    pass


class ReconstructionFailure(NumericalFailure):
    pass


# -- hypotheses of a statement do not hold ----------------------------------

class HypothesisError(MaggeomError, ValueError):
    pass


class SingularMatrix(HypothesisError):
    pass


class NotPositiveDefinite(HypothesisError):
    pass


class NotPositiveSemidefinite(HypothesisError):
    pass


class NotNegativeType(HypothesisError):
    pass


class WrongDimension(HypothesisError):
    pass


class RankOutOfRange(HypothesisError):
    pass


class ZeroMagnitude(HypothesisError):
    pass


class DegenerateAngles(HypothesisError):
    pass


class DegenerateDirection(HypothesisError):
    pass


class NoWeighting(MaggeomError):
    """The system ``Z w = 1`` is inconsistent, so no magnitude exists."""
