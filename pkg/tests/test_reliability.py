import numpy as np
import pytest

from dnacap import (
    DnaParams,
    ExtensionFamily,
    ThetaVector,
    binomial_extend,
    exponent_objective,
    ideal_exponent,
    lb_objective,
    make_bsc,
    mutual_information,
    poisson_truncated,
    reliability_lower_bound,
    reliability_minimizer,
    supported_rate,
    uniform,
    validate_dmc,
)
from dnacap.errors import InvalidDistribution, NonIntegerAlpha
from dnacap.reliability import (
    _exponent_grad,
    exponent_objective_many,
    hazard_vector,
    solve_exponent,
)

from conftest import random_px

MI_BSC11 = 0.3466318436412792  # log2 - h_b(0.11), 40-digit evaluation


def lattice_thetas(dbar, resolution):
    """All sub-distributions over [0, dbar] on a 1/resolution lattice."""
    from itertools import product

    pts = []
    def rec(prefix, remaining):
        if len(prefix) == dbar:
            for k in range(remaining + 1):
                pts.append(prefix + [k])
            return
        for k in range(remaining + 1):
            rec(prefix + [k], remaining - k)
    rec([], resolution)
    return np.array(pts, dtype=float) / resolution


def lattice_min(R, i_vals, alpha, beta, resolution=200):
    """Oracle: brute-force minimization of the exponent objective over the
    feasible lattice."""
    thetas = lattice_thetas(i_vals.size, resolution)
    gamma = thetas[:, 1:] @ i_vals - (1.0 - thetas[:, 0]) / beta
    feasible = thetas[gamma <= R]
    vals = exponent_objective_many(feasible, alpha)
    return float(vals.min())


class TestThetaVector:
    def test_valid_subdistribution(self):
        t = ThetaVector(np.array([0.2, 0.3, 0.1]))
        assert t.dbar == 2

    def test_rejects_excess_mass(self):
        with pytest.raises(InvalidDistribution):
            ThetaVector(np.array([0.6, 0.6]))

    def test_rejects_negative(self):
        with pytest.raises(InvalidDistribution):
            ThetaVector(np.array([0.5, -0.1]))


class TestSupportedRate:
    def test_full_erasure_is_zero(self):
        p = DnaParams(alpha=5.0, beta=4.0, w=make_bsc(0.11), dbar=4)
        theta = np.zeros(5)
        theta[0] = 1.0
        assert supported_rate(theta, [0.5, 0.5], p) == pytest.approx(0.0, abs=1e-15)

    def test_poisson_profile_matches_lb_objective(self):
        p = DnaParams(alpha=5.0, beta=4.0, w=make_bsc(0.11), dbar=12)
        pmf = poisson_truncated(5.0, 12).pmf
        px = [0.5, 0.5]
        assert supported_rate(pmf, px, p) == pytest.approx(lb_objective(px, p), abs=1e-14)

    def test_single_draw_profile(self):
        p = DnaParams(alpha=5.0, beta=4.0, w=make_bsc(0.11), dbar=3)
        theta = np.array([0.0, 1.0, 0.0, 0.0])
        expected = MI_BSC11 - 0.25
        assert supported_rate(theta, [0.5, 0.5], p) == pytest.approx(expected, abs=1e-12)


class TestExponentObjective:
    def test_zero_at_poisson_profile(self):
        for alpha, dbar in [(5.0, 10), (2.0, 6), (0.7, 4)]:
            pmf = poisson_truncated(alpha, dbar).pmf
            assert exponent_objective(pmf, alpha) == pytest.approx(0.0, abs=1e-14)

    def test_all_erasure_outage(self):
        theta = np.zeros(11)
        theta[0] = 1.0
        # d_b(1 || e^-5) = 5: the chance that nothing survives sampling
        assert exponent_objective(theta, 5.0) == pytest.approx(5.0, abs=1e-12)

    def test_nonnegative(self):
        rng = np.random.default_rng(13)
        for _ in range(20):
            t = rng.dirichlet(np.ones(7)) * rng.uniform(0.2, 1.0)
            assert exponent_objective(t, 3.0) >= -1e-12

    def test_midpoint_convexity(self):
        rng = np.random.default_rng(14)
        for _ in range(20):
            a = rng.dirichlet(np.ones(6)) * rng.uniform(0.3, 1.0)
            b = rng.dirichlet(np.ones(6)) * rng.uniform(0.3, 1.0)
            mid = exponent_objective((a + b) / 2, 2.5)
            assert mid <= (exponent_objective(a, 2.5) + exponent_objective(b, 2.5)) / 2 + 1e-9

    def test_vectorized_matches_scalar(self):
        rng = np.random.default_rng(15)
        thetas = rng.dirichlet(np.ones(5), size=8) * rng.uniform(0.2, 1.0, size=(8, 1))
        batch = exponent_objective_many(thetas, 4.0)
        for k in range(8):
            assert batch[k] == pytest.approx(exponent_objective(thetas[k], 4.0), abs=1e-12)

    def test_gradient_finite_differences(self):
        rng = np.random.default_rng(16)
        t = np.array([0.05, 0.1, 0.2, 0.15, 0.1])
        g = _exponent_grad(t, 3.0)
        eps = 1e-7
        for j in range(t.size):
            tp, tm = t.copy(), t.copy()
            tp[j] += eps
            tm[j] -= eps
            fd = (exponent_objective(tp, 3.0) - exponent_objective(tm, 3.0)) / (2 * eps)
            assert g[j] == pytest.approx(fd, abs=1e-5)

    def test_hazards_in_unit_interval(self):
        h = hazard_vector(5.0, 20)
        assert np.all(h > 0) and np.all(h < 1)


class TestSolveExponent:
    def test_feasible_poisson_returns_zero(self):
        w = make_bsc(0.11)
        p = DnaParams(alpha=5.0, beta=4.0, w=w, dbar=8)
        lb = lb_objective([0.5, 0.5], p)
        assert reliability_minimizer(lb + 0.01, p, [0.5, 0.5])[0] == 0.0
        assert reliability_minimizer(lb, p, [0.5, 0.5])[0] == 0.0

    def test_matches_lattice_oracle_noiseless(self):
        # noiseless binary channel, dbar=2
        i_vals = np.array([np.log(2.0), np.log(2.0)])
        value, theta = solve_exponent(0.0, i_vals, alpha=5.0, beta=4.0)
        oracle = lattice_min(0.0, i_vals, 5.0, 4.0)
        assert abs(value - oracle) <= 2e-3

    def test_matches_lattice_oracle_binding(self):
        i_vals = np.array([np.log(2.0), np.log(2.0)])
        for R in (0.0, 0.05, 0.1, 0.15):
            value, theta = solve_exponent(R, i_vals, alpha=1.0, beta=4.0)
            oracle = lattice_min(R, i_vals, 1.0, 4.0)
            assert abs(value - oracle) <= 2e-3
            resid = theta[1:] @ i_vals - (1 - theta[0]) / 4.0 - R
            assert resid <= 1e-6

    def test_w0_instances_match_lattice(self, w0):
        px = uniform(4)
        i_vals = np.array([mutual_information(px, binomial_extend(w0, d)) for d in (1, 2)])
        for R in (0.0, 0.08, 0.15):
            value, _ = solve_exponent(R, i_vals, alpha=2.0, beta=3.0)
            oracle = lattice_min(R, i_vals, 2.0, 3.0)
            assert abs(value - oracle) <= 2e-3

    def test_nonincreasing_in_rate(self):
        i_vals = np.array([np.log(2.0), np.log(2.0)])
        values = [solve_exponent(R, i_vals, 1.0, 4.0)[0] for R in np.linspace(0, 0.22, 8)]
        assert all(np.diff(values) <= 1e-8)

    def test_positive_below_capacity(self):
        w = make_bsc(0.11)
        p = DnaParams(alpha=5.0, beta=4.0, w=w, dbar=10)
        lb = lb_objective([0.5, 0.5], p)
        value, _ = reliability_minimizer(lb - 0.01, p, [0.5, 0.5])
        assert value > 0.0


class TestReliabilityLowerBound:
    def test_zero_at_capacity(self):
        w = make_bsc(0.11)
        p = DnaParams(alpha=5.0, beta=4.0, w=w, dbar=8)
        lb = lb_objective([0.5, 0.5], p)
        assert reliability_lower_bound(lb + 0.05, p) == 0.0

    def test_px_optimization_at_least_uniform(self):
        w = validate_dmc([[0.85, 0.1, 0.05], [0.1, 0.8, 0.1], [0.05, 0.15, 0.8]])
        p = DnaParams(alpha=1.0, beta=3.0, w=w, dbar=3)
        opt_val = reliability_lower_bound(0.05, p)
        unif_val = reliability_lower_bound(0.05, p, px=uniform(3))
        assert opt_val >= unif_val - 1e-6

    def test_rejects_negative_rate(self):
        p = DnaParams(alpha=5.0, beta=4.0, w=make_bsc(0.11), dbar=4)
        with pytest.raises(InvalidDistribution):
            reliability_lower_bound(-0.1, p)


class TestIdealExponent:
    def test_zero_when_rate_supported(self):
        w = make_bsc(0.11)
        p = DnaParams(alpha=2.0, beta=4.0, w=w, dbar=5)
        i2 = mutual_information([0.5, 0.5], binomial_extend(w, 2))
        val = ideal_exponent(i2 - 0.25 + 0.02, [0.5, 0.5], p)
        assert val == pytest.approx(0.0, abs=1e-9)

    def test_positive_at_rate_zero_noiseless(self):
        p = DnaParams(alpha=1.0, beta=50.0, w=make_bsc(0.0), dbar=3)
        assert ideal_exponent(0.0, [0.5, 0.5], p) > 0.0

    def test_non_integer_alpha_rejected(self):
        p = DnaParams(alpha=1.5, beta=4.0, w=make_bsc(0.1), dbar=3)
        with pytest.raises(NonIntegerAlpha):
            ideal_exponent(0.1, [0.5, 0.5], p)

    def test_matches_joint_lattice_oracle(self):
        # exhaustive 1/100-lattice minimization over the 2x3 merged joint simplex
        w = make_bsc(0.11)
        p = DnaParams(alpha=2.0, beta=4.0, w=w, dbar=5)
        px = np.array([0.5, 0.5])
        val = ideal_exponent(0.05, px, p)
        oracle = _joint_lattice_oracle(0.05, px, w, beta=4.0, order=2, resolution=100)
        assert abs(val - oracle) <= 5e-3


def _joint_lattice_oracle(R, px, w, beta, order, resolution):
    """Brute-force scan of joint laws Q on X x (merged Y^order) for a binary
    input alphabet, vectorized by splitting the lattice by the row-0 mass."""
    from scipy.special import xlogy

    V = np.asarray(binomial_extend(w, order).rows)
    nx, ny = V.shape
    assert nx == 2
    logv = np.log(V)
    logpx = np.log(px)

    def comps(n):
        out = []
        for a in range(n + 1):
            for b in range(n - a + 1):
                out.append((a, b, n - a - b))
        return np.array(out, dtype=float) if out else np.zeros((0, 3))

    best = np.inf
    for s in range(resolution + 1):
        A = comps(s) / resolution            # row 0 blocks
        B = comps(resolution - s) / resolution
        qx = np.array([s, resolution - s], dtype=float) / resolution
        s_x = float(xlogy(qx, qx).sum())
        d_qx = s_x - float(qx @ logpx)
        sq_a = xlogy(A, A).sum(axis=1)
        sq_b = xlogy(B, B).sum(axis=1)
        qv_a = A @ logv[0]
        qv_b = B @ logv[1]
        s_q = sq_a[:, None] + sq_b[None, :]
        q_logv = qv_a[:, None] + qv_b[None, :]
        qy = A[:, None, :] + B[None, :, :]
        s_y = xlogy(qy, qy).sum(axis=2)
        d_v = s_q - q_logv - s_x
        i_q = s_q - s_x - s_y
        val = d_qx + d_v + np.maximum(d_qx + i_q - 1.0 / beta - R, 0.0)
        m = float(val.min())
        if m < best:
            best = m
    return best
