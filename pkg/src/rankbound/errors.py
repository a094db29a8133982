"""Exception types raised across the package."""


class RankboundError(ValueError):
    """Base class for every error raised by rankbound."""


class DimensionMismatch(RankboundError):
    pass


class NotHermitian(RankboundError):
    pass


class NegativeEigenvalue(RankboundError):
    pass


class InvalidRank(RankboundError):
    pass


class InvalidP(RankboundError):
    pass


class InvalidSpectrum(RankboundError):
    pass


class NotNormalized(RankboundError):
    pass


class UnsupportedDimension(RankboundError):
    pass


class ParseError(RankboundError):
    """State file is not valid JSON or does not follow the schema."""


class ValidationError(RankboundError):
    """A matrix violates a density-matrix invariant.

    ``invariant`` names the violated property (``shape``, ``finite``,
    ``hermitian``, ``trace``, ``positivity``) and ``magnitude`` is the
    worst offending value.
    """

    def __init__(self, invariant: str, magnitude: float, detail: str = ""):
        self.invariant = invariant
        self.magnitude = float(magnitude)
        msg = f"{invariant} violated (worst magnitude {self.magnitude:.3e})"
        if detail:
            msg += f": {detail}"
        super().__init__(msg)
