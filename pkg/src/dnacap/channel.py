"""Discrete memoryless sequencing channels and their multi-draw extensions.

A channel is a row-stochastic matrix W(y|x).  The d-order extension feeds
one input symbol into d independent copies of W; its output tuples are
merged by empirical type (composition), which is lossless for mutual
information and keeps the output alphabet polynomial in d.
"""

from dataclasses import dataclass, field
from math import comb, factorial, lgamma

import numpy as np
from scipy.special import gammaln

from .errors import InvalidDistribution, NegativeEntry, OrderZero, OutOfRange, RowSumOutOfTolerance

ROW_SUM_TOL = 1e-9


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class Dmc:
    """Row-stochastic transition matrix on finite alphabets."""

    rows: np.ndarray

    @property
    def num_inputs(self) -> int:
        return self.rows.shape[0]

    @property
    def num_outputs(self) -> int:
        return self.rows.shape[1]

    def nu_min(self) -> float:
        """max_{x,y} log 1/W(y|x); infinite iff some entry is zero."""
        wmin = self.rows.min()
        return float(np.inf) if wmin <= 0.0 else float(-np.log(wmin))

    def is_modulo_additive(self, tol: float = 1e-12) -> bool:
        """True iff square and every row is the cyclic shift of row 0."""
        if self.num_inputs != self.num_outputs:
            return False
        base = self.rows[0]
        return all(
            np.abs(self.rows[x] - np.roll(base, x)).max() <= tol
            for x in range(1, self.num_inputs)
        )


@dataclass(frozen=True)
class Composition:
    """Type of an output d-tuple: per-letter counts plus its multinomial weight."""

    counts: tuple
    multiplicity: int

    @property
    def order(self) -> int:
        return sum(self.counts)


@dataclass(frozen=True)
class MergedChannel:
    """d-order extension of a Dmc with type-merged outputs.

    rows[x][k] = multiplicity(outputs[k]) * prod_y W(y|x)^counts[k][y]
    """

    base: Dmc
    order: int
    outputs: tuple
    rows: np.ndarray
    counts: np.ndarray = field(repr=False)

    @property
    def num_inputs(self) -> int:
        return self.rows.shape[0]

    @property
    def num_outputs(self) -> int:
        return self.rows.shape[1]


def validate_dmc(matrix) -> Dmc:
    """Build a Dmc from a rectangular array, renormalizing rows.

    Entries below -1e-15 raise NegativeEntry; rows whose sum deviates from 1
    by more than 1e-9 raise RowSumOutOfTolerance (reporting row and sum).
    """
    rows = np.asarray(matrix, dtype=float)
    if rows.ndim != 2 or rows.size == 0:
        raise InvalidDistribution("channel matrix must be a nonempty 2-d array")
    if rows.min() < -1e-15:
        bad = np.unravel_index(np.argmin(rows), rows.shape)
        raise NegativeEntry(f"entry {bad} is negative: {rows[bad]!r}")
    rows = np.maximum(rows, 0.0)
    sums = rows.sum(axis=1)
    for i, s in enumerate(sums):
        if abs(s - 1.0) > ROW_SUM_TOL:
            raise RowSumOutOfTolerance(i, float(s))
    return Dmc(_frozen(rows / sums[:, None]))


def make_bsc(w: float) -> Dmc:
    """Binary symmetric channel with crossover probability w."""
    if not 0.0 <= w <= 1.0:
        raise OutOfRange(f"crossover probability {w!r} outside [0, 1]")
    return Dmc(_frozen(np.array([[1.0 - w, w], [w, 1.0 - w]])))


def make_modulo_additive(noise) -> Dmc:
    """Channel Y = X + Z (mod n) for an independent noise pmf Z.

    Row x is the noise pmf shifted so that W(y|x) = noise[(y - x) mod n];
    rows are cyclic shifts of one another.
    """
    noise = np.asarray(noise, dtype=float)
    if noise.ndim != 1 or noise.size == 0 or noise.min() < -1e-15 or abs(noise.sum() - 1.0) > ROW_SUM_TOL:
        raise InvalidDistribution("noise must be a probability vector")
    noise = np.maximum(noise, 0.0)
    noise = noise / noise.sum()
    n = noise.size
    return Dmc(_frozen(np.stack([np.roll(noise, x) for x in range(n)])))


def compositions(d: int, k: int):
    """All k-part compositions of d, in decreasing lexicographic order.

    Canonical output indexing: (d,0,...) first, (0,...,d) last, so at d = 1
    composition e_y sits at index y and the extension reproduces the base
    channel column for column.
    """
    if k == 1:
        yield (d,)
        return
    for i in range(d, -1, -1):
        for rest in compositions(d - i, k - 1):
            yield (i,) + rest


def num_compositions(d: int, k: int) -> int:
    return comb(d + k - 1, k - 1)


def multinomial_coefficient(counts) -> int:
    """Exact d! / prod(counts!)."""
    total = sum(counts)
    out = factorial(total)
    for c in counts:
        out //= factorial(c)
    return out


def binomial_extend(w: Dmc, d: int) -> MergedChannel:
    """d-order extension of w with composition-merged outputs.

    d = 1 reproduces w with unit multiplicities.  Row values are computed in
    the log domain so large d stays finite even for small channel entries.
    """
    if d < 1:
        raise OrderZero(f"extension order must be >= 1, got {d}")
    ny = w.num_outputs
    counts = np.array(list(compositions(d, ny)), dtype=np.int64)
    log_mult = lgamma(d + 1) - gammaln(counts + 1.0).sum(axis=1)
    with np.errstate(divide="ignore"):
        logw = np.log(w.rows)
    rows = np.empty((w.num_inputs, counts.shape[0]))
    with np.errstate(invalid="ignore"):
        for x in range(w.num_inputs):
            terms = np.where(counts > 0, counts * logw[x][None, :], 0.0).sum(axis=1)
            rows[x] = np.exp(log_mult + terms)
    outputs = tuple(
        Composition(tuple(int(c) for c in row), multinomial_coefficient(row))
        for row in counts
    )
    return MergedChannel(base=w, order=d, outputs=outputs, rows=_frozen(rows), counts=counts)
