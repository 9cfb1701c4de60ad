"""Capacity lower/upper bounds for the DNA storage channel and the critical
molecule-length parameter.

The channel is parameterized by (alpha, beta, W): coverage depth alpha,
molecule-length parameter beta = L / log M, and sequencing channel W.  The
lower bound is a Poisson-weighted sum of multi-draw mutual informations
minus an ordering cost (1/beta)(1 - pi_alpha(0)); the upper bound adds a
per-order excess-rate term that vanishes once the common-input deficit
exceeds 2/beta.
"""

import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.special import xlogy

from .channel import Dmc, binomial_extend
from .errors import DimensionMismatch, InfiniteNuMin, InvalidDistribution, NoFixedPointInRange, NotModuloAdditive
from .infotheory import (
    binary_entropy,
    mutual_information_many,
    poisson_truncated,
    uniform,
    _probs,
)
from .simplex import grid_gap_estimate, refine_on_simplex, simplex_grid

LOG2 = float(np.log(2.0))


@dataclass(frozen=True)
class DnaParams:
    """Channel parameters: coverage depth, molecule-length parameter,
    sequencing channel, and truncation order for the bound sums."""

    alpha: float
    beta: float
    w: Dmc
    dbar: int = 20

    def __post_init__(self):
        if self.alpha <= 0:
            raise InvalidDistribution(f"alpha must be positive, got {self.alpha!r}")
        # the length scaling needs beta > 1 asymptotically; the boundary value
        # is admitted so sweeps can evaluate the formulas from beta = 1
        if self.beta < 1:
            raise InvalidDistribution(f"beta must be at least 1, got {self.beta!r}")
        if self.dbar < 1:
            raise InvalidDistribution(f"dbar must be >= 1, got {self.dbar!r}")


@dataclass(frozen=True)
class BoundResult:
    value: float
    argmax_px: np.ndarray
    truncation_error: float
    optimizer_gap: float


@dataclass(frozen=True)
class OptimizerConfig:
    """Deterministic grid + coordinate-refinement settings.

    The default grid resolution of 10 matches a 1e-1 lattice on the simplex;
    refinement runs golden-section line searches along simplex edges until a
    sweep gains less than refine_tol.  The upper-bound objective is not
    certified concave, so it is refined from the ub_restarts best grid
    points (plus the lower bound's maximizer).
    """

    grid_resolution: int = 10
    refine_tol: float = 1e-9
    golden_iters: int = 40
    max_sweeps: int = 60
    ub_restarts: int = 5
    beta_bracket: tuple = (1.000001, 1000.0)
    bisect_tol: float = 1e-6


DEFAULT_OPT = OptimizerConfig()


class ExtensionFamily:
    """Precomputed multi-draw extensions of one channel.

    Holds merged-channel matrices for orders 1..dbar plus the even orders up
    to 2*dbar needed by the deficit terms, with a stacked layout so that all
    first-dbar mutual informations come out of one matrix product.
    """

    def __init__(self, w: Dmc, dbar: int, with_deficit: bool = True):
        self.w = w
        self.dbar = dbar
        self.with_deficit = with_deficit
        orders = list(range(1, dbar + 1))
        if with_deficit:
            orders += [2 * d for d in range(1, dbar + 1) if 2 * d > dbar]
        self.order_rows = {d: binomial_extend(w, d).rows for d in orders}
        lb_mats = [self.order_rows[d] for d in range(1, dbar + 1)]
        self._lb_stack = np.concatenate(lb_mats, axis=1)
        sizes = [m.shape[1] for m in lb_mats]
        self._lb_starts = np.concatenate([[0], np.cumsum(sizes)[:-1]]).astype(np.intp)
        self._lb_rowent = np.stack(
            [-_xlogy_rowsum(m) for m in lb_mats], axis=1
        )
        self._rowent = {d: -_xlogy_rowsum(m) for d, m in self.order_rows.items()}

    def mi_first_orders(self, px: np.ndarray) -> np.ndarray:
        """I(px, W^(+d)) for d = 1..dbar in one pass."""
        out = px @ self._lb_stack
        ent = _xlogy_vec(out)
        h_out = -np.add.reduceat(ent, self._lb_starts)
        return h_out - px @ self._lb_rowent

    def mi_order(self, px: np.ndarray, d: int) -> float:
        rows = self.order_rows[d]
        out = px @ rows
        return float(-_xlogy_vec(out).sum() - px @ self._rowent[d])

    def mi_grid(self, grid: np.ndarray):
        """(I_d(px))_{d=1..dbar} and (I_{2d}(px))_{d=1..dbar} on a batch."""
        i_first = np.stack(
            [mutual_information_many(grid, self.order_rows[d]) for d in range(1, self.dbar + 1)],
            axis=1,
        )
        i_double = None
        if self.with_deficit:
            i_double = np.stack(
                [
                    i_first[:, 2 * d - 1] if 2 * d <= self.dbar
                    else mutual_information_many(grid, self.order_rows[2 * d])
                    for d in range(1, self.dbar + 1)
                ],
                axis=1,
            )
        return i_first, i_double


def _xlogy_vec(v: np.ndarray) -> np.ndarray:
    return xlogy(v, v)


def _xlogy_rowsum(m: np.ndarray) -> np.ndarray:
    return xlogy(m, m).sum(axis=1)


def _validate_px(px, w: Dmc) -> np.ndarray:
    px = _probs(px)
    if px.size != w.num_inputs:
        raise DimensionMismatch(f"input law has {px.size} letters, channel {w.num_inputs}")
    return px


def lb_objective(px, p: DnaParams, family: ExtensionFamily | None = None) -> float:
    """sum_{d=1}^{dbar} pi_alpha(d) I(px, W^(+d)) - (1/beta)(1 - pi_alpha(0)).

    May be negative; the truncated sum keeps it a valid achievable rate.
    """
    px = _validate_px(px, p.w)
    fam = family or ExtensionFamily(p.w, p.dbar, with_deficit=False)
    if fam.dbar < p.dbar:
        raise DimensionMismatch(f"family truncated at {fam.dbar}, need {p.dbar}")
    tail = poisson_truncated(p.alpha, p.dbar)
    i_vals = fam.mi_first_orders(px)[: p.dbar]
    return float(i_vals @ tail.pmf[1:] - (1.0 - tail.pmf[0]) / p.beta)


def excess_rate_omega(px, w: Dmc, d: int, beta: float,
                      family: ExtensionFamily | None = None) -> float:
    """Excess-rate term [min(1/beta, 2/beta - CID(px, W^(+d)))]_+ in [0, 1/beta]."""
    px = _validate_px(px, w)
    if family is not None:
        i1 = family.mi_order(px, d) if d > family.dbar else family.mi_first_orders(px)[d - 1]
        i2 = family.mi_order(px, 2 * d)
    else:
        from .infotheory import mutual_information

        i1 = mutual_information(px, binomial_extend(w, d))
        i2 = mutual_information(px, binomial_extend(w, 2 * d))
    deficit = 2.0 * i1 - i2
    return float(np.clip(min(1.0 / beta, 2.0 / beta - deficit), 0.0, None))


def _ub_objective_single(px: np.ndarray, beta: float, fam: ExtensionFamily,
                         pmf: np.ndarray) -> float:
    """Upper-bound objective at one point, truncating the deficit scan once
    CID exceeds 2/beta (the deficit is nondecreasing in the order)."""
    i_first = fam.mi_first_orders(px)
    total = float(i_first @ pmf[1:])
    two_over = 2.0 / beta
    one_over = 1.0 / beta
    for d in range(1, fam.dbar + 1):
        i2 = i_first[2 * d - 1] if 2 * d <= fam.dbar else fam.mi_order(px, 2 * d)
        deficit = 2.0 * i_first[d - 1] - i2
        if deficit >= two_over:
            break
        total += pmf[d] * min(one_over, two_over - deficit)
    return total - (1.0 - pmf[0]) / beta


def _ub_values_grid(i_first: np.ndarray, i_double: np.ndarray, beta: float,
                    pmf: np.ndarray) -> np.ndarray:
    deficit = 2.0 * i_first - i_double
    omega = np.clip(np.minimum(1.0 / beta, 2.0 / beta - deficit), 0.0, None)
    return (i_first + omega) @ pmf[1:] - (1.0 - pmf[0]) / beta


def capacity_lower_bound(p: DnaParams, opt: OptimizerConfig = DEFAULT_OPT,
                         family: ExtensionFamily | None = None) -> BoundResult:
    """Maximize the lower-bound objective over input laws, clamped at 0.

    Modulo-additive channels skip the search: uniform input is optimal for
    every extension order, so the objective is evaluated there directly.
    """
    fam = family or ExtensionFamily(p.w, p.dbar, with_deficit=False)
    tail = poisson_truncated(p.alpha, p.dbar)
    trunc = tail.tail_mass * float(np.log(p.w.num_inputs))

    if p.w.is_modulo_additive():
        px = uniform(p.w.num_inputs)
        val = lb_objective(px, p, family=fam)
        return BoundResult(max(val, 0.0), px, trunc, 0.0)

    grid = simplex_grid(p.w.num_inputs, opt.grid_resolution)
    i_first = np.stack(
        [mutual_information_many(grid, fam.order_rows[d]) for d in range(1, p.dbar + 1)],
        axis=1,
    )
    values = i_first @ tail.pmf[1:] - (1.0 - tail.pmf[0]) / p.beta
    best_idx = int(np.argmax(values))

    def f(px):
        return float(fam.mi_first_orders(px) @ tail.pmf[1:]) - (1.0 - tail.pmf[0]) / p.beta

    val, px = refine_on_simplex(f, grid[best_idx], tol=opt.refine_tol,
                                max_sweeps=opt.max_sweeps, golden_iters=opt.golden_iters)
    gap = max(grid_gap_estimate(values, grid, opt.grid_resolution, best_idx), opt.refine_tol)
    return BoundResult(max(val, 0.0), px, trunc, gap)


def capacity_upper_bound(p: DnaParams, opt: OptimizerConfig = DEFAULT_OPT,
                         family: ExtensionFamily | None = None) -> BoundResult:
    """Maximize the upper-bound objective over input laws and add the
    truncation allowance so the result stays a valid upper bound.

    Requires every channel entry strictly positive (finite max log-likelihood
    ratio); otherwise the bound is unproven and InfiniteNuMin is raised.
    """
    if not np.isfinite(p.w.nu_min()):
        raise InfiniteNuMin("channel has a zero entry, upper bound hypothesis fails")
    fam = family or ExtensionFamily(p.w, p.dbar, with_deficit=True)
    tail = poisson_truncated(p.alpha, p.dbar)
    trunc = tail.tail_mass * float(np.log(p.w.num_inputs))

    grid = simplex_grid(p.w.num_inputs, opt.grid_resolution)
    i_first, i_double = fam.mi_grid(grid)
    values = _ub_values_grid(i_first, i_double, p.beta, tail.pmf)

    def f(px):
        return _ub_objective_single(px, p.beta, fam, tail.pmf)

    starts = [grid[k] for k in np.argsort(values)[::-1][: opt.ub_restarts]]
    lb = capacity_lower_bound(p, opt, family=fam)
    starts.append(lb.argmax_px)
    best_val, best_px = -np.inf, None
    for s in starts:
        v, q = refine_on_simplex(f, s, tol=opt.refine_tol,
                                 max_sweeps=opt.max_sweeps, golden_iters=opt.golden_iters)
        if v > best_val:
            best_val, best_px = v, q
    best_idx = int(np.argmax(values))
    gap = max(grid_gap_estimate(values, grid, opt.grid_resolution, best_idx), opt.refine_tol)
    return BoundResult(best_val + trunc, best_px, trunc, gap)


def critical_beta(alpha: float, w: Dmc, opt: OptimizerConfig = DEFAULT_OPT,
                  dbar: int = 20) -> float:
    """Smallest beta at which the excess-rate terms vanish for the
    upper-bound maximizer, solved by bisection on the fixed-point residual
    beta * CID(P*(beta), W) - 2.
    """
    if not np.isfinite(w.nu_min()):
        raise InfiniteNuMin("channel has a zero entry, upper bound hypothesis fails")
    fam = ExtensionFamily(w, dbar, with_deficit=True)

    def residual(beta: float) -> float:
        p = DnaParams(alpha=alpha, beta=beta, w=w, dbar=dbar)
        ub = capacity_upper_bound(p, opt, family=fam)
        px = ub.argmax_px
        deficit = 2.0 * fam.mi_first_orders(px)[0] - fam.mi_order(px, 2)
        return beta * deficit - 2.0

    lo, hi = opt.beta_bracket
    r_lo, r_hi = residual(lo), residual(hi)
    if not (r_lo < 0.0 <= r_hi):
        raise NoFixedPointInRange(lo, hi, r_lo, r_hi)
    while hi - lo > opt.bisect_tol:
        mid = 0.5 * (lo + hi)
        if residual(mid) < 0.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def critical_beta_uniform(alpha: float, w: Dmc) -> float:
    """2 / CID(uniform, W) for modulo-additive channels (closed form)."""
    if not w.is_modulo_additive():
        raise NotModuloAdditive("channel rows are not cyclic shifts of one another")
    from .infotheory import cid

    deficit = cid(uniform(w.num_inputs), w, 1)
    if deficit <= 0.0:
        raise NoFixedPointInRange(1.0, np.inf, -2.0, -2.0)
    return 2.0 / deficit


def critical_beta_prior_bsc(w: float) -> float:
    """Earlier BSC threshold 2 / (log 2 - h_b(4 w)), applicable for w < 1/8
    only; infinite outside that regime."""
    if w >= 0.125:
        return float(np.inf)
    denom = LOG2 - binary_entropy(4.0 * w)
    if denom <= 0.0:
        return float(np.inf)
    return 2.0 / denom


@dataclass(frozen=True)
class BoundsRow:
    beta: float
    lb: BoundResult
    ub: BoundResult | None
    ub_error: str | None = None


_WORKER_STATE: dict = {}


def _sweep_init(rows, alpha, dbar, opt):
    _WORKER_STATE["fam"] = ExtensionFamily(Dmc(rows), dbar, with_deficit=True)
    _WORKER_STATE["alpha"] = alpha
    _WORKER_STATE["dbar"] = dbar
    _WORKER_STATE["opt"] = opt


def _sweep_one(beta: float) -> BoundsRow:
    fam = _WORKER_STATE["fam"]
    p = DnaParams(alpha=_WORKER_STATE["alpha"], beta=beta, w=fam.w, dbar=_WORKER_STATE["dbar"])
    opt = _WORKER_STATE["opt"]
    lb = capacity_lower_bound(p, opt, family=fam)
    try:
        ub = capacity_upper_bound(p, opt, family=fam)
        return BoundsRow(beta, lb, ub)
    except InfiniteNuMin as exc:
        return BoundsRow(beta, lb, None, str(exc))


def worker_count() -> int:
    try:
        return max(1, int(os.environ.get("DNACAP_WORKERS", "1")))
    except ValueError:
        return 1


def bounds_sweep(w: Dmc, alpha: float, betas, dbar: int = 20,
                 opt: OptimizerConfig = DEFAULT_OPT, workers: int | None = None):
    """Lower/upper bounds per beta; rows come back sorted by beta.

    Each beta is computed independently (restarts are grid-derived, never
    chained across sweep points) so the result is the same for any worker
    count.
    """
    betas = sorted(float(b) for b in betas)
    workers = worker_count() if workers is None else workers
    if workers <= 1:
        _sweep_init(w.rows, alpha, dbar, opt)
        return [_sweep_one(b) for b in betas]
    with ProcessPoolExecutor(max_workers=workers, initializer=_sweep_init,
                             initargs=(w.rows, alpha, dbar, opt)) as pool:
        rows = list(pool.map(_sweep_one, betas))
    return sorted(rows, key=lambda r: r.beta)
