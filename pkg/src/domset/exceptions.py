"""Exception hierarchy for the domset package.

``DomsetError`` is the root. Input problems derive from ``ValidationError``
(which is also a ``ValueError`` so generic callers can catch it the usual
way); algorithmic failure modes get their own leaf classes so callers can
branch on them.
"""


class DomsetError(Exception):
    """Base class for every error raised by this package."""


class ValidationError(DomsetError, ValueError):
    """Invalid input data or arguments."""


class NonSquareError(ValidationError):
    """A matrix that must be square is not."""


class ZeroSizeError(ValidationError):
    """An empty matrix or vector where at least one element is required."""


class AsymmetryError(ValidationError):
    """Asymmetry beyond tolerance in strict affinity validation."""


class NegativeWeightError(ValidationError):
    """Negative entries where nonnegative weights are required."""


class DimensionMismatchError(ValidationError):
    """Operands whose shapes do not line up."""


class ParseError(ValidationError):
    """Malformed input file."""


class ZeroDenominatorError(DomsetError):
    """A normalizing denominator (for example x'Ax) is zero."""


class AllZeroMatrixError(ValidationError):
    """An affinity with no positive entry where structure is required."""


class NotDominantError(DomsetError):
    """A vertex set that fails the dominant-set conditions."""


class TooLargeError(ValidationError):
    """Instance exceeds the documented size bound for an exact routine."""


class ConstraintUnsatisfiedError(DomsetError):
    """A constrained run converged without touching the constraint set."""

    def __init__(self, message, alpha=None):
        super().__init__(message)
        self.alpha = alpha


class UnassignedVertexError(ValidationError):
    """A vertex belongs to no cluster, so it cannot be assigned."""


class DegenerateSigmaError(ValidationError):
    """A kernel bandwidth of zero (all distances identical or zero)."""


class TooFewSamplesError(ValidationError):
    """Not enough samples to form a covariance descriptor."""


class SingularAfterRegularizationError(ValidationError):
    """A covariance matrix still singular after the epsilon-I nudge."""


class NonNormalizedKernelError(ValidationError):
    """Kernel matrix whose diagonal is not one."""


class EmptyTrackletError(ValidationError):
    """A tracklet with no descriptors."""


class OverlappingPriorsError(ValidationError):
    """Prior clusters that share a vertex, or a pinned pair also forbidden."""


class LengthMismatchError(ValidationError):
    """Ensemble labelings of different lengths."""


class EmptyListError(ValidationError):
    """An empty ranked neighbor list."""


class TooFewNeighborsError(ValidationError):
    """A ranked neighbor list with fewer entries than the rule needs."""


class EmptyGroupError(ValidationError):
    """A grouped affinity with an empty group."""


class ZeroAreaError(ValidationError):
    """Feature curves whose areas cannot be inverted (see feature_weights)."""
