"""Reliability-function lower bound via convex minimization over
sampling-fraction vectors, and the ideal-sampling exponent.

The outage exponent at rate R is the minimum, over sampling fractions
theta whose supported rate falls at or below R, of a chain of weighted
binary divergences against the Poisson hazard; it is zero exactly when the
truncated Poisson profile itself is feasible.
"""

from dataclasses import dataclass

import numpy as np
from scipy.special import xlogy

from .bounds import DnaParams, ExtensionFamily, OptimizerConfig, DEFAULT_OPT
from .channel import Dmc, binomial_extend
from .errors import (
    DegenerateConditional,
    DimensionMismatch,
    InvalidDistribution,
    NonIntegerAlpha,
)
from .infotheory import kl_divergence, mutual_information_many, poisson_truncated, uniform, _probs
from .simplex import golden_max, project_capped_simplex, refine_on_simplex, simplex_grid

MASS_EPS = 1e-12


@dataclass(frozen=True)
class ThetaVector:
    """Sub-distribution over sampling multiplicities d in [0, dbar]."""

    theta: np.ndarray

    def __post_init__(self):
        t = np.asarray(self.theta, dtype=float)
        if t.ndim != 1 or t.size == 0:
            raise InvalidDistribution("theta must be a nonempty vector")
        if t.min() < -1e-15:
            raise InvalidDistribution(f"negative theta entry {t.min()!r}")
        t = np.maximum(t, 0.0)
        if t.sum() > 1.0 + 1e-12:
            raise InvalidDistribution(f"theta mass {t.sum()!r} exceeds 1")
        t.setflags(write=False)
        object.__setattr__(self, "theta", t)

    @property
    def dbar(self) -> int:
        return self.theta.size - 1


def _theta(t) -> np.ndarray:
    if isinstance(t, ThetaVector):
        return t.theta
    return ThetaVector(np.asarray(t, dtype=float)).theta


def hazard_vector(alpha: float, dbar: int) -> np.ndarray:
    """pi_alpha(d) / P[S >= d] for d = 0..dbar."""
    from .infotheory import poisson_pmf, poisson_tail_at_least

    return np.array([poisson_pmf(alpha, d) / poisson_tail_at_least(alpha, d)
                     for d in range(dbar + 1)])


def _objective_fast(t: np.ndarray, log_h: np.ndarray, log1m_h: np.ndarray) -> float:
    """Exponent objective with precomputed hazard logs (solver hot path)."""
    mu = 1.0 - np.concatenate([[0.0], np.cumsum(t)[:-1]])
    rest = mu - t
    live = mu >= MASS_EPS
    terms = (xlogy(t, t) + xlogy(rest, rest) - xlogy(mu, mu)
             - t * log_h - rest * log1m_h)
    return float(np.where(live, terms, 0.0).sum())


def _grad_fast(t: np.ndarray, log_h: np.ndarray, log1m_h: np.ndarray) -> np.ndarray:
    mu = np.maximum(1.0 - np.concatenate([[0.0], np.cumsum(t)[:-1]]), 1e-300)
    rest = np.maximum(mu - t, 1e-300)
    tpos = np.maximum(t, 1e-300)
    head = np.log(tpos) - np.log(rest) - log_h + log1m_h
    tail_terms = np.log(mu) - np.log(rest) + log1m_h
    suffix = np.concatenate([np.cumsum(tail_terms[::-1])[::-1][1:], [0.0]])
    return head + suffix


def exponent_objective(theta, alpha: float) -> float:
    """sum_d (1 - sum_{i<d} theta_i) d_b(theta_d / (1 - sum_{i<d} theta_i) || h_d).

    Zero exactly at the truncated Poisson profile.  Once the remaining mass
    1 - sum_{i<d} theta_i drops below 1e-12 the leftover terms are vacuous
    and treated as zero.
    """
    t = _theta(theta)
    dbar = t.size - 1
    h = hazard_vector(alpha, dbar)
    mu = 1.0 - np.concatenate([[0.0], np.cumsum(t)[:-1]])
    total = 0.0
    for d in range(dbar + 1):
        if mu[d] < MASS_EPS:
            break
        if t[d] > mu[d] + 1e-9:
            raise DegenerateConditional(
                f"theta_{d}={t[d]!r} exceeds remaining mass {mu[d]!r}")
        rest = mu[d] - t[d]
        total += (xlogy(t[d], t[d]) + xlogy(rest, rest) - xlogy(mu[d], mu[d])
                  - t[d] * np.log(h[d]) - rest * np.log1p(-h[d]))
    return float(total)


def exponent_objective_many(thetas: np.ndarray, alpha: float) -> np.ndarray:
    """Vectorized exponent objective over rows of thetas (used by the
    lattice oracle in tests and kept alongside the scalar form)."""
    T = np.asarray(thetas, dtype=float)
    dbar = T.shape[1] - 1
    h = hazard_vector(alpha, dbar)
    mu = 1.0 - np.concatenate([np.zeros((T.shape[0], 1)), np.cumsum(T, axis=1)[:, :-1]], axis=1)
    rest = np.maximum(mu - T, 0.0)
    live = mu >= MASS_EPS
    terms = (xlogy(T, T) + xlogy(rest, rest) - xlogy(mu, mu)
             - T * np.log(h)[None, :] - rest * np.log1p(-h)[None, :])
    return np.where(live, terms, 0.0).sum(axis=1)


def _exponent_grad(t: np.ndarray, alpha: float) -> np.ndarray:
    dbar = t.size - 1
    h = hazard_vector(alpha, dbar)
    mu = 1.0 - np.concatenate([[0.0], np.cumsum(t)[:-1]])
    mu = np.maximum(mu, 1e-300)
    rest = np.maximum(mu - t, 1e-300)
    tpos = np.maximum(t, 1e-300)
    head = np.log(tpos) - np.log(rest) - np.log(h) + np.log1p(-h)
    tail_terms = np.log(mu) - np.log(rest) + np.log1p(-h)
    suffix = np.concatenate([np.cumsum(tail_terms[::-1])[::-1][1:], [0.0]])
    return head + suffix


def supported_rate(theta, px, p: DnaParams, family: ExtensionFamily | None = None) -> float:
    """Conditional supported rate sum_d theta_d I(px, W^(+d)) - (1/beta)(1 - theta_0)."""
    t = _theta(theta)
    px = _probs(px)
    if px.size != p.w.num_inputs:
        raise DimensionMismatch(f"input law has {px.size} letters, channel {p.w.num_inputs}")
    i_vals = _mi_table(px, p.w, t.size - 1, family)
    return float(t[1:] @ i_vals - (1.0 - t[0]) / p.beta)


def _mi_table(px: np.ndarray, w: Dmc, dbar: int, family: ExtensionFamily | None) -> np.ndarray:
    if family is not None and family.dbar >= dbar:
        return family.mi_first_orders(px)[:dbar]
    P = px[None, :]
    return np.array([mutual_information_many(P, binomial_extend(w, d).rows)[0]
                     for d in range(1, dbar + 1)])


def solve_exponent(R: float, i_vals: np.ndarray, alpha: float, beta: float,
                   residual_tol: float = 1e-6, theta0: np.ndarray | None = None):
    """Minimize the exponent objective subject to the supported rate of
    theta staying at or below R.

    i_vals[d-1] = I(px, W^(+d)) for d = 1..dbar.  Solved by projected
    gradient on a quadratic penalty mu [Gamma(theta) - R]_+^2 with mu
    doubling until the constraint residual drops below residual_tol,
    seeded at the truncated Poisson profile.  Returns (value, theta).
    """
    dbar = i_vals.size
    pmf = poisson_truncated(alpha, dbar).pmf
    gamma_coef = np.concatenate([[1.0 / beta], i_vals])
    h = hazard_vector(alpha, dbar)
    log_h = np.log(h)
    log1m_h = np.log1p(-h)

    def gamma(t):
        return float(t[1:] @ i_vals - (1.0 - t[0]) / beta)

    theta = pmf.copy() if theta0 is None else np.array(theta0, dtype=float)
    if gamma(pmf) <= R:
        return 0.0, pmf
    mu_pen = 256.0
    for _ in range(40):
        def obj(t):
            g = gamma(t) - R
            return _objective_fast(t, log_h, log1m_h) + mu_pen * max(g, 0.0) ** 2

        def grad(t):
            g = gamma(t) - R
            out = _grad_fast(t, log_h, log1m_h)
            if g > 0:
                out = out + 2.0 * mu_pen * g * gamma_coef
            return out

        step = 1.0
        current = obj(theta)
        for _ in range(400):
            g = grad(theta)
            while True:
                cand = project_capped_simplex(theta - step * g)
                value = obj(cand)
                if value <= current - 1e-4 / step * ((cand - theta) ** 2).sum() or step < 1e-14:
                    break
                step *= 0.5
            move = np.abs(cand - theta).max()
            theta, current = cand, value
            step = min(step * 1.3, 1e3)
            if move < 1e-12:
                break
        if gamma(theta) - R < residual_tol:
            break
        mu_pen *= 4.0
    return exponent_objective(theta, alpha), theta


def reliability_lower_bound(R: float, p: DnaParams, opt: OptimizerConfig = DEFAULT_OPT,
                            px=None, family: ExtensionFamily | None = None) -> float:
    """Error-exponent lower bound at rate R (per-molecule scaling).

    Maximizes over input laws by grid search plus simplex refinement unless
    px pins the law (curves are usually reported at the uniform input).
    Returns 0 once the truncated Poisson profile satisfies the rate
    constraint, i.e. for all R at or above the capacity lower bound.
    The feasible set uses "<= R": the infimum over the open set of the
    continuous objective equals the minimum over its closure.
    """
    if R < 0:
        raise InvalidDistribution(f"rate must be nonnegative, got {R!r}")
    fam = family or ExtensionFamily(p.w, p.dbar, with_deficit=False)

    def inner(q):
        i_vals = fam.mi_first_orders(np.asarray(q, dtype=float))
        return solve_exponent(R, i_vals, p.alpha, p.beta)[0]

    if px is not None:
        return inner(_probs(px))
    grid = simplex_grid(p.w.num_inputs, opt.grid_resolution)
    values = np.array([inner(q) for q in grid])
    best = int(np.argmax(values))
    val, _ = refine_on_simplex(inner, grid[best], tol=max(opt.refine_tol, 1e-7),
                               max_sweeps=8, golden_iters=24)
    return float(val)


def reliability_minimizer(R: float, p: DnaParams, px,
                          family: ExtensionFamily | None = None):
    """(exponent, argmin theta) at a fixed input law; the CSV report path."""
    fam = family or ExtensionFamily(p.w, p.dbar, with_deficit=False)
    i_vals = fam.mi_first_orders(_probs(px))
    return solve_exponent(R, i_vals, p.alpha, p.beta)


def _min_channel_divergence(qx: np.ndarray, V: np.ndarray, lam: float,
                            tol: float = 1e-13, max_iter: int = 2000) -> float:
    """min over channels Q of D(Q||V|qx) + lam I(qx, Q) by alternating
    closed-form updates (tilted rows against the current output marginal)."""
    with np.errstate(divide="ignore"):
        logv = np.where(V > 0, np.log(V), -np.inf)
    qy = qx @ V
    s = 1.0 / (1.0 + lam)
    for _ in range(max_iter):
        with np.errstate(divide="ignore", invalid="ignore"):
            logq = s * logv + (1.0 - s) * np.where(qy > 0, np.log(qy), -np.inf)[None, :]
            rowmax = logq.max(axis=1, keepdims=True)
            logq = np.where(np.isfinite(rowmax), logq - rowmax, 0.0)
        Q = np.exp(logq)
        Q /= Q.sum(axis=1, keepdims=True)
        qy_next = qx @ Q
        if np.abs(qy_next - qy).sum() < tol:
            qy = qy_next
            break
        qy = qy_next
    with np.errstate(divide="ignore", invalid="ignore"):
        dv = np.where(Q > 0, Q * (np.log(np.where(Q > 0, Q, 1.0)) - logv), 0.0).sum(axis=1)
        di = np.where(Q > 0, Q * (np.log(np.where(Q > 0, Q, 1.0))
                                  - np.log(np.where(qy > 0, qy, 1.0))[None, :]), 0.0).sum(axis=1)
    live = qx > 0  # rows with no input mass contribute nothing
    return float(qx[live] @ dv[live] + lam * (qx[live] @ di[live]))


def ideal_exponent(R: float, px, p: DnaParams, qx_resolution: int | None = None) -> float:
    """Error-exponent lower bound for the ideal-sampling channel in which
    every molecule is read exactly alpha times (per-symbol scaling).

    Minimizes D(Q_X||px) + D(Q_{Y|X}||W^(+a)|Q_X) + [D(Q_X||px) +
    I_Q(X;Y) - 1/beta - R]_+ over joint laws Q.  The bracket is dualized:
    for each candidate Q_X the value is a concave maximum over a scalar
    multiplier of an inner convex channel problem solved by alternating
    minimization; Q_X itself is handled by lattice search plus refinement.
    """
    alpha = p.alpha
    if abs(alpha - round(alpha)) > 1e-12 or round(alpha) < 1:
        raise NonIntegerAlpha(f"ideal sampling needs integer alpha >= 1, got {alpha!r}")
    a = int(round(alpha))
    px = _probs(px)
    if px.size != p.w.num_inputs:
        raise DimensionMismatch(f"input law has {px.size} letters, channel {p.w.num_inputs}")
    V = binomial_extend(p.w, a).rows
    rate_term = 1.0 / p.beta + R

    def value(qx):
        qx = np.asarray(qx, dtype=float)
        dx = kl_divergence(qx, px)
        if not np.isfinite(dx):
            return np.inf

        def phi(lam):
            return (1.0 + lam) * dx - lam * rate_term + _min_channel_divergence(qx, V, lam)

        _, best = golden_max(phi, 0.0, 1.0, iters=48)
        return max(best, phi(0.0), phi(1.0))

    if qx_resolution is None:
        qx_resolution = 100 if px.size == 2 else 10
    grid = simplex_grid(px.size, qx_resolution)
    vals = np.array([value(q) for q in grid])
    best = int(np.argmin(vals))
    neg, _ = refine_on_simplex(lambda q: -value(q), grid[best], tol=1e-10,
                               max_sweeps=12, golden_iters=32)
    return float(max(-neg, 0.0))
