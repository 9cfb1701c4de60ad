"""Entropy, divergence, mutual information, the common-input deficit,
Poisson utilities, and Blahut-Arimoto capacity.

All quantities are in nats.
"""

from dataclasses import dataclass

import numpy as np
from scipy.special import gammainc, gammaln, rel_entr, xlogy

from .channel import Dmc, MergedChannel, binomial_extend
from .errors import DegenerateDenominator, DimensionMismatch, InvalidDistribution, NoConvergence


@dataclass(frozen=True)
class Distribution:
    """Probability vector on a finite alphabet."""

    probs: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.probs, dtype=float)
        if p.ndim != 1 or p.size == 0:
            raise InvalidDistribution("probabilities must form a nonempty vector")
        if p.min() < -1e-15:
            raise InvalidDistribution(f"negative probability {p.min()!r}")
        p = np.maximum(p, 0.0)
        if abs(p.sum() - 1.0) > 1e-12:
            raise InvalidDistribution(f"probabilities sum to {p.sum()!r}")
        p = p / p.sum()
        p.setflags(write=False)
        object.__setattr__(self, "probs", p)

    def __len__(self):
        return self.probs.size


@dataclass(frozen=True)
class PoissonTail:
    """Truncated Poisson pmf pi_alpha(d) for d in [0, dbar] plus its tail mass."""

    alpha: float
    pmf: np.ndarray
    tail_mass: float


def _probs(p) -> np.ndarray:
    if isinstance(p, Distribution):
        return p.probs
    return np.asarray(p, dtype=float)


def _rows(ch) -> np.ndarray:
    if isinstance(ch, (Dmc, MergedChannel)):
        return ch.rows
    return np.asarray(ch, dtype=float)


def uniform(n: int) -> np.ndarray:
    return np.full(n, 1.0 / n)


def entropy(p) -> float:
    """-sum p log p, with 0 log 0 = 0."""
    p = _probs(p)
    return float(-xlogy(p, p).sum())


def kl_divergence(p, q) -> float:
    """D(p||q) in nats; +inf when p puts mass where q vanishes.

    The infinity is returned as a sentinel rather than raised so optimizers
    can treat such points as infeasible.
    """
    p, q = _probs(p), _probs(q)
    if p.shape != q.shape:
        raise DimensionMismatch(f"alphabets differ: {p.shape} vs {q.shape}")
    return float(rel_entr(p, q).sum())


def binary_entropy(a: float) -> float:
    return float(-xlogy(a, a) - xlogy(1.0 - a, 1.0 - a))


def binary_kl(a: float, b: float) -> float:
    """d_b(a||b) for scalars in [0,1]; +inf on support mismatch."""
    return float(rel_entr(a, b) + rel_entr(1.0 - a, 1.0 - b))


def mutual_information(p, ch) -> float:
    """I(P, V) = H(output marginal) - sum_x P(x) H(V(.|x))."""
    p = _probs(p)
    rows = _rows(ch)
    if p.size != rows.shape[0]:
        raise DimensionMismatch(f"input law has {p.size} letters, channel {rows.shape[0]}")
    out = p @ rows
    h_out = -xlogy(out, out).sum()
    h_rows = -xlogy(rows, rows).sum(axis=1)
    return float(h_out - p @ h_rows)


def mutual_information_many(P: np.ndarray, rows: np.ndarray) -> np.ndarray:
    """I(P_g, V) for a batch of input laws, one per row of P."""
    out = P @ rows
    h_out = -xlogy(out, out).sum(axis=1)
    h_rows = -xlogy(rows, rows).sum(axis=1)
    return h_out - P @ h_rows


def cid(p, w: Dmc, d: int) -> float:
    """Common-input deficit 2 I(P, W^(+d)) - I(P, W^(+2d)).

    Equals the mutual information between two conditionally independent
    d-draw outputs fed by a common input; nonnegative, and zero iff the
    d-draw channel is completely noisy under p.
    """
    p = _probs(p)
    if p.size != w.num_inputs:
        raise DimensionMismatch(f"input law has {p.size} letters, channel {w.num_inputs}")
    i1 = mutual_information(p, binomial_extend(w, d))
    i2 = mutual_information(p, binomial_extend(w, 2 * d))
    return 2.0 * i1 - i2


def poisson_pmf(alpha: float, d: int) -> float:
    """alpha^d e^-alpha / d!, computed in the log domain."""
    if alpha <= 0:
        raise InvalidDistribution(f"alpha must be positive, got {alpha!r}")
    if d < 0:
        raise InvalidDistribution(f"d must be nonnegative, got {d!r}")
    return float(np.exp(d * np.log(alpha) - alpha - gammaln(d + 1.0)))


def poisson_tail_at_least(alpha: float, d: int) -> float:
    """P[Pois(alpha) >= d], stable for large d via the regularized gamma."""
    if d <= 0:
        return 1.0
    return float(gammainc(d, alpha))


def poisson_hazard(alpha: float, d: int) -> float:
    """pi_alpha(d) / (1 - sum_{i<d} pi_alpha(i)), the chance of exactly d
    draws given at least d."""
    if d < 0:
        raise InvalidDistribution(f"d must be nonnegative, got {d!r}")
    denom = poisson_tail_at_least(alpha, d)
    if denom < 1e-300:
        raise DegenerateDenominator(f"P[S >= {d}] underflows for alpha={alpha!r}")
    return poisson_pmf(alpha, d) / denom


def poisson_truncated(alpha: float, dbar: int) -> PoissonTail:
    ds = np.arange(dbar + 1)
    pmf = np.exp(xlogy(ds, alpha) - alpha - gammaln(ds + 1.0))
    pmf.setflags(write=False)
    return PoissonTail(alpha=alpha, pmf=pmf, tail_mass=max(float(1.0 - pmf.sum()), 0.0))


def blahut_arimoto(ch, tol: float = 1e-12, max_iter: int = 100_000):
    """Channel capacity and a capacity-achieving input law.

    Iterates the standard alternating update and stops once the certificate
    max_x D(W_x || Q) - I(r, W) drops below tol, so the returned value is
    within tol of capacity and the returned argmax achieves it to the same
    accuracy.  Raises NoConvergence (with the last gap) at the iteration cap.
    """
    rows = _rows(ch)
    nx = rows.shape[0]
    r = uniform(nx)
    with np.errstate(divide="ignore"):
        log_rows = np.where(rows > 0, np.log(rows), 0.0)
    gap = np.inf
    for _ in range(max_iter):
        q = r @ rows
        with np.errstate(divide="ignore", invalid="ignore"):
            log_ratio = np.where(rows > 0, log_rows - np.log(q)[None, :], 0.0)
        div = (rows * log_ratio).sum(axis=1)
        i_low = float(r @ div)
        gap = float(div.max() - i_low)
        if gap <= tol:
            return i_low, r
        log_r = np.log(np.maximum(r, 1e-300)) + div
        log_r -= log_r.max()
        r = np.exp(log_r)
        r /= r.sum()
    raise NoConvergence(gap, max_iter)
