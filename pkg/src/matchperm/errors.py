"""Exception types raised by matchperm."""


class MatchPermError(Exception):
    """Base class for all matchperm errors."""


class InvalidDimension(MatchPermError, ValueError):
    """Matrix or matching has the wrong shape (odd side, mismatched sizes)."""


class TooSmall(InvalidDimension):
    """Matrix side is even but below the minimum of 4."""


class InvalidValue(MatchPermError, ValueError):
    """Non-finite entries, nonzero diagonal where forbidden, or asymmetric input in strict mode."""


class InvalidMatching(MatchPermError, ValueError):
    """Array is not a fixed-point-free involution."""


class InvalidPair(MatchPermError, ValueError):
    pass


class EnumerationTooLarge(MatchPermError, ValueError):
    pass


class DegenerateDistribution(MatchPermError, ValueError):
    """The null distribution of the statistic is a point mass."""


class InternalConsistencyError(MatchPermError, RuntimeError):
    """A numerical identity that must hold failed beyond rounding tolerance."""
