"""Exception types shared across the package.

Names follow the error contracts of the public operations; all inherit
from DnacapError so callers can catch package failures in one clause.
"""


class DnacapError(Exception):
    """Base class for all package-specific failures."""


# channel construction
class NegativeEntry(DnacapError):
    pass


class RowSumOutOfTolerance(DnacapError):
    def __init__(self, row: int, row_sum: float):
        self.row = row
        self.row_sum = row_sum
        super().__init__(f"row {row} sums to {row_sum!r}, expected 1 within tolerance")


class OrderZero(DnacapError):
    pass


class OutOfRange(DnacapError):
    pass


class InvalidDistribution(DnacapError):
    pass


# information measures
class DimensionMismatch(DnacapError):
    pass


class DegenerateDenominator(DnacapError):
    pass


class NoConvergence(DnacapError):
    def __init__(self, gap: float, iterations: int):
        self.gap = gap
        self.iterations = iterations
        super().__init__(f"no convergence after {iterations} iterations, last gap {gap:.3e}")


# symmetry search
class SearchBudgetExceeded(DnacapError):
    """Partition search hit its budget; symmetry status is undecided."""


# capacity bounds
class InfiniteNuMin(DnacapError):
    pass


class NoFixedPointInRange(DnacapError):
    def __init__(self, lo: float, hi: float, res_lo: float, res_hi: float):
        self.bracket = (lo, hi)
        super().__init__(
            f"residual does not change sign on [{lo:g}, {hi:g}] "
            f"(residuals {res_lo:.3e}, {res_hi:.3e})"
        )


class NotModuloAdditive(DnacapError):
    pass


# reliability
class DegenerateConditional(DnacapError):
    pass


class NonIntegerAlpha(DnacapError):
    pass


# simulator
class InvalidAmplificationVector(DnacapError):
    pass


class InconsistentCandidate(DnacapError):
    pass


class EnumerationCapExceeded(DnacapError):
    pass


# cli
class UnknownFigure(DnacapError):
    pass
