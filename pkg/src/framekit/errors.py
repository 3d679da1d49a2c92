"""Exception hierarchy shared by every framekit module."""


class FrameKitError(ValueError):
    """Base class for all framekit errors."""


class NotSquare(FrameKitError):
    pass


class NotSymmetric(FrameKitError):
    pass


class NonFiniteInput(FrameKitError):
    pass


class NegativeEigenvalue(FrameKitError):
    pass


class DimensionMismatch(FrameKitError):
    pass


class NotSpanning(FrameKitError):
    pass


class CountTooSmall(FrameKitError):
    pass


class DidNotConverge(FrameKitError):
    """Iteration budget exhausted; ``best`` carries the best iterate found."""

    def __init__(self, message, best=None):
        super().__init__(message)
        self.best = best


class IndexOutOfRange(FrameKitError):
    pass


class DuplicateIndex(FrameKitError):
    pass


class BudgetExceeded(FrameKitError):
    pass


class InvalidPartition(FrameKitError):
    pass


class NotRieszBasis(FrameKitError):
    pass


class NotAFusionFrame(FrameKitError):
    pass


class MeasurementOutsideSubspace(FrameKitError):
    pass


class NotTight(FrameKitError):
    pass


class NotUnitNorm(FrameKitError):
    pass


class BlockTooLarge(FrameKitError):
    pass


class LocalNotSpanning(FrameKitError):
    pass


class AmbientMismatch(FrameKitError):
    pass


class TooFewSubspaces(FrameKitError):
    pass


class DependentBlock(FrameKitError):
    pass


class UnknownBlock(FrameKitError):
    pass


class EpsilonTooLarge(FrameKitError):
    pass


class EpsilonOutOfRange(FrameKitError):
    pass


class FormulaNegative(FrameKitError):
    pass


class HypothesisViolated(FrameKitError):
    pass
