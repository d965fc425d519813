"""Exception hierarchy.

Every error raised deliberately by the package derives from ``LrdLabError``,
which is a ``ValueError`` so callers that only care about bad input can catch
the builtin.
"""


class LrdLabError(ValueError):
    pass


class InvalidHurst(LrdLabError):
    pass


class TruncationTooShort(LrdLabError):
    pass


class LagOutOfRange(LrdLabError):
    pass


class EmbeddingNotPSD(LrdLabError):
    pass


class OrderTooLarge(LrdLabError):
    pass


class NonIntegrable(LrdLabError):
    pass


class RankUndefined(LrdLabError):
    pass


class InfiniteVariance(LrdLabError):
    pass


class UnsupportedFunctional(LrdLabError):
    pass


class NoPowerTail(LrdLabError):
    pass


class NTooSmall(LrdLabError):
    pass


class InvalidParameter(LrdLabError):
    pass


class RegimeMismatch(LrdLabError):
    pass


class GridTooCoarse(LrdLabError):
    pass


class GridUnsuitable(LrdLabError):
    pass


class DegenerateRectangle(LrdLabError):
    pass


class TooFewExceedances(LrdLabError):
    pass


class ConfigError(LrdLabError):
    pass
