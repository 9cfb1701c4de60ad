"""Probability-simplex helpers: lattice grids, Euclidean projection, and a
deterministic coordinate line-search refiner for maximizing objectives over
input distributions."""

import numpy as np

from .channel import compositions

GOLDEN = (np.sqrt(5.0) - 1.0) / 2.0


def simplex_grid(k: int, resolution: int) -> np.ndarray:
    """All points of the k-simplex with coordinates that are multiples of
    1/resolution, in lexicographic order."""
    pts = np.array(list(compositions(resolution, k)), dtype=float)
    return pts / resolution


def project_capped_simplex(v: np.ndarray) -> np.ndarray:
    """Euclidean projection onto {x >= 0, sum x <= 1}."""
    w = np.maximum(v, 0.0)
    if w.sum() <= 1.0:
        return w
    u = np.sort(v)[::-1]
    css = np.cumsum(u) - 1.0
    k = np.arange(1, v.size + 1)
    rho = np.nonzero(u - css / k > 0)[0][-1]
    lam = css[rho] / (rho + 1.0)
    return np.maximum(v - lam, 0.0)


def golden_max(g, lo: float, hi: float, iters: int = 40):
    """Golden-section maximization of g on [lo, hi]; returns (t, g(t))."""
    a, b = lo, hi
    c = b - GOLDEN * (b - a)
    d = a + GOLDEN * (b - a)
    fc, fd = g(c), g(d)
    for _ in range(iters):
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - GOLDEN * (b - a)
            fc = g(c)
        else:
            a, c, fc = c, d, fd
            d = a + GOLDEN * (b - a)
            fd = g(d)
        if b - a < 1e-14:
            break
    t = 0.5 * (a + b)
    return t, g(t)


def refine_on_simplex(f, p0: np.ndarray, tol: float = 1e-9, max_sweeps: int = 60,
                      golden_iters: int = 40):
    """Coordinate line search along simplex edges.

    From p0, repeatedly sweeps all ordered coordinate pairs (i, j), moving
    mass from i to j by golden-section search, until a full sweep improves
    the objective by less than tol.  Deterministic; returns (value, point).
    """
    p = np.array(p0, dtype=float)
    best = float(f(p))
    n = p.size
    for _ in range(max_sweeps):
        gain = 0.0
        for i in range(n):
            for j in range(n):
                if i == j or p[i] <= 1e-15:
                    continue

                def g(t, i=i, j=j):
                    q = p.copy()
                    q[i] -= t
                    q[j] += t
                    return float(f(q))

                t, v = golden_max(g, 0.0, p[i], iters=golden_iters)
                if v > best:
                    gain += v - best
                    best = v
                    p[i] -= t
                    p[j] += t
        if gain < tol:
            break
    return best, p


def grid_gap_estimate(values: np.ndarray, grid: np.ndarray, resolution: int,
                      center: int) -> float:
    """Optimizer-gap certificate at the grid scale: the largest objective
    drop from the best lattice point to any of its neighbors (one
    1/resolution mass transfer), an observed local-Lipschitz bound around
    the maximizer."""
    index = {tuple(np.round(pt * resolution).astype(int)): k for k, pt in enumerate(grid)}
    key = tuple(np.round(grid[center] * resolution).astype(int))
    n = grid.shape[1]
    worst = 0.0
    for i in range(n):
        if key[i] == 0:
            continue
        for j in range(n):
            if i == j:
                continue
            nb = list(key)
            nb[i] -= 1
            nb[j] += 1
            other = index.get(tuple(nb))
            if other is not None:
                worst = max(worst, abs(values[center] - values[other]))
    return float(worst)
