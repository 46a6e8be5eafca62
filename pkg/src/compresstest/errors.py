"""Exception types raised by the library.

Every error is a subclass of CompressTestError so callers can catch the
whole family at once; the CLI maps them to exit code 1.
"""


class CompressTestError(Exception):
    """Base class for all library errors."""


class IndivisibleBinning(CompressTestError):
    """Requested bin count does not divide the sample size."""


class IndivisibleBlocking(CompressTestError):
    """Block size incompatible with the sample size."""


class DimensionMismatch(CompressTestError):
    """Points or samples disagree on dimension."""


class DegenerateSample(CompressTestError):
    """Sample carries no usable scale (e.g. all pairwise distances zero)."""


class Unsupported(CompressTestError):
    """Operation not defined for this kernel variant."""


class SampleTooSmall(CompressTestError):
    """Estimator needs more points than the sample provides."""


class UnequalSizes(CompressTestError):
    """Operation requires samples of equal size."""


class InvalidDesign(CompressTestError):
    """Pair design indices out of range or malformed."""


class DesignTooLarge(CompressTestError):
    """More pairs requested than ordered pairs exist."""


class EmptyCoreset(CompressTestError):
    """A coreset with zero points where at least one is required."""


class InvalidPermutation(CompressTestError):
    """Permutation is not a bijection on the expected index range."""


class WrongArity(CompressTestError):
    """Operation defined only for a fixed input size."""


class OddInput(CompressTestError):
    """Halving requires an even number of points."""


class IncompatibleSize(CompressTestError):
    """Input size is not 4^(g+t) for any integer t >= 0."""


class InvalidDelta(CompressTestError):
    """Failure probability outside (0, 1)."""


class GroupingError(CompressTestError):
    """Permutation bin count does not divide the compression bin count."""


class NoFeasibleBinning(CompressTestError):
    """No power-of-four bin size satisfies the divisibility constraints."""


class EmptyKernelList(CompressTestError):
    """Aggregated test invoked with no kernels."""
