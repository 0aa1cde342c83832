import numpy as np
import pytest

from wassda.assimilate import (
    AnalysisInput,
    GaussianErrorSpec,
    WmVdaProblem,
    assemble_transport_qp,
    assemble_wmvda_qp,
    cdf_match_then_3dvar,
    three_d_var,
    wm_vda,
)
from wassda.histogram import ProbabilityHistogram, bin_samples, build_grid
from wassda.oracles import minimize_quadratic_misfit
from wassda.qpsolve import MarginalConstraints
from wassda.transport import cost_matrix, wasserstein


def _scalar_input(x_b, y, H=1.0, B=1.0, R=1.0):
    return AnalysisInput(
        x_b=np.array([float(x_b)]),
        y=np.array([float(y)]),
        H=np.array([[float(H)]]),
        B=np.array([[float(B)]]),
        R=np.array([[float(R)]]),
    )


def _empirical_reference(rng, center, variance, grid, n=500):
    draws = rng.normal(center, np.sqrt(variance), n)
    return bin_samples(draws, grid)


class TestThreeDVar:
    def test_equal_weight_average(self):
        res = three_d_var(_scalar_input(0.0, 2.0))
        assert res.x_a[0] == pytest.approx(1.0, abs=1e-12)
        assert res.P_a[0, 0] == pytest.approx(0.5, abs=1e-12)

    def test_amplifying_observation_operator(self):
        res = three_d_var(_scalar_input(0.0, 2.0, H=2.0))
        # hand evaluation: (H R^-1 y) / (H^2 R^-1 + B^-1) = 4 / 5
        assert res.x_a[0] == pytest.approx(0.8, abs=1e-12)
        assert res.P_a[0, 0] == pytest.approx(0.2, abs=1e-12)

    def test_uninformative_observation(self):
        res = three_d_var(_scalar_input(1.5, 99.0, R=1e12))
        assert res.x_a[0] == pytest.approx(1.5, abs=1e-6)

    def test_matches_numeric_minimization(self):
        rng = np.random.default_rng(12)
        for _ in range(10):
            m, n = int(rng.integers(1, 4)), int(rng.integers(1, 4))
            G1 = rng.normal(size=(m, m))
            G2 = rng.normal(size=(n, n))
            B = G1 @ G1.T + np.eye(m)
            R = G2 @ G2.T + np.eye(n)
            H = rng.normal(size=(n, m))
            x_b = rng.normal(size=m)
            y = rng.normal(size=n)
            res = three_d_var(AnalysisInput(x_b, y, H, B, R))
            ref = minimize_quadratic_misfit(x_b, y, H, B, R)
            assert np.abs(res.x_a - ref).max() < 1e-6

    def test_bad_covariance_rejected(self):
        with pytest.raises(ValueError):
            AnalysisInput(
                np.array([0.0]), np.array([0.0]), np.array([[1.0]]),
                np.array([[-1.0]]), np.array([[1.0]]),
            )


class TestGaussianErrorSpec:
    def test_rejects_indefinite_covariance(self):
        with pytest.raises(ValueError):
            GaussianErrorSpec(np.zeros(2), np.array([[1.0, 2.0], [2.0, 1.0]]))

    def test_draw_statistics(self):
        spec = GaussianErrorSpec(np.array([0.5]), np.array([[1.5]]))
        rng = np.random.default_rng(0)
        draws = spec.draw(rng, size=100_000)
        assert abs(draws.mean() - 0.5) < 3 * np.sqrt(1.5 / draws.size)
        assert abs(draws.var() - 1.5) < 0.05


class TestAssembly:
    def test_rank_one_quadratic_at_tiny_k(self):
        grid = build_grid(-1, 1, 2)
        ref = ProbabilityHistogram(grid, np.array([0.5, 0.5]))
        prob = WmVdaProblem(_scalar_input(0.0, 0.0), ref, grid, lam=0.0)
        qp = assemble_wmvda_qp(prob)
        Q = qp.dense_Q()
        eigvals = np.linalg.eigvalsh(Q)
        assert np.sum(eigvals > 1e-10 * eigvals.max()) == 1

    def test_lambda_term_only(self):
        grid = build_grid(0, 3, 4)
        lam = 2.5
        qp = assemble_transport_qp(
            grid.points[None, :], np.full(4, 0.25),
            Binv=np.zeros((1, 1)), Rinv=np.zeros((1, 1)),
            H=np.eye(1), x_b=np.zeros(1), y=np.zeros(1), lam=lam,
        )
        expected = lam * cost_matrix(grid, grid, 2.0).costs.ravel()
        assert np.array_equal(qp.c, expected)
        assert qp.dense_Q().max() == 0.0

    def test_column_map_recovers_reference_marginal(self):
        rng = np.random.default_rng(4)
        k = 6
        p = rng.dirichlet(np.full(k, 1.0))
        p_xr = rng.dirichlet(np.full(k, 1.0))
        coupling = np.outer(p, p_xr)
        cons = MarginalConstraints(k, k, constrain_rows=False, constrain_cols=True)
        assert np.allclose(cons.matvec(coupling.ravel()), p_xr, atol=1e-14)

    def test_general_m_matches_dense_construction(self):
        # joint two-dimensional support, desk-scale only
        rng = np.random.default_rng(9)
        k, m = 3, 2
        axes = [np.linspace(-1, 1, k), np.linspace(0, 2, k)]
        mesh = np.meshgrid(*axes, indexing="ij")
        X = np.stack([g.ravel() for g in mesh])  # m x K
        K = k**m
        ref = rng.dirichlet(np.full(K, 1.0))
        Binv = np.diag(rng.uniform(0.5, 2.0, m))
        Rinv = np.diag(rng.uniform(0.5, 2.0, m))
        H = np.eye(m)
        x_b = rng.normal(size=m)
        y = rng.normal(size=m)
        lam = 0.7
        qp = assemble_transport_qp(X, ref, Binv, Rinv, H, x_b, y, lam)

        omega = np.hstack([np.eye(K)] * K)  # row-marginal map for column-major stacking
        # our plan layout is row-major (free index major): build the matching maps
        free_map = np.zeros((K, K * K))
        ref_map = np.zeros((K, K * K))
        for i in range(K):
            for j in range(K):
                free_map[i, i * K + j] = 1.0
                ref_map[j, i * K + j] = 1.0
        XO = X @ free_map
        S = Binv + H.T @ Rinv @ H
        Q_ref = 2.0 * XO.T @ S @ XO
        cost = np.array([
            [np.sum((X[:, i] - X[:, j]) ** 2) for j in range(K)] for i in range(K)
        ])
        c_ref = lam * cost.ravel() - XO.T @ (2.0 * (Binv @ x_b + H.T @ Rinv @ y))
        assert np.allclose(qp.dense_Q(), Q_ref, atol=1e-12)
        assert np.allclose(qp.c, c_ref, atol=1e-12)
        assert np.allclose(qp.dense_A(), ref_map, atol=1e-14)
        assert omega.shape == free_map.shape


class TestWmVda:
    def _problem(self, rng, lam, x_b=11.0, y=8.6, B=1.5, R=0.75, truth=9.5):
        grid = build_grid(truth - 12.0, truth + 12.0, 50)
        ref = _empirical_reference(rng, truth, 4.5, grid)
        return WmVdaProblem(_scalar_input(x_b, y, B=B, R=R), ref, grid, lam)

    def test_lambda_zero_matches_three_d_var(self):
        rng = np.random.default_rng(100)
        prob = self._problem(rng, lam=0.0)
        res = wm_vda(prob)
        ref = three_d_var(prob.input)
        assert abs(res.x_a[0] - ref.x_a[0]) <= prob.grid.spacing

    def test_large_lambda_matches_reference(self):
        rng = np.random.default_rng(101)
        prob_hi = self._problem(rng, lam=1000.0)
        res_hi = wm_vda(prob_hi)
        rng = np.random.default_rng(101)
        prob_mid = self._problem(rng, lam=5.0)
        res_mid = wm_vda(prob_mid)
        w_hi = wasserstein(res_hi.histogram, prob_hi.reference)
        w_mid = wasserstein(res_mid.histogram, prob_mid.reference)
        assert w_hi <= w_mid
        assert np.abs(res_hi.histogram.masses - prob_hi.reference.masses).max() < 1e-3

    def test_small_lambda_splits_mass_into_multiple_modes(self):
        # biased background above and observation below the reference
        rng = np.random.default_rng(102)
        prob = self._problem(rng, lam=0.1, x_b=13.0, y=6.0)
        res = wm_vda(prob)
        m = res.histogram.masses
        interior = (m[1:-1] > m[:-2]) & (m[1:-1] > m[2:]) & (m[1:-1] > 5e-3)
        assert interior.sum() >= 2

    def test_reference_marginal_pinned_for_any_lambda(self):
        rng = np.random.default_rng(103)
        for lam in (0.0, 0.1, 5.0, 1000.0):
            prob = self._problem(rng, lam=lam)
            res = wm_vda(prob)
            err = np.abs(res.plan.target_marginal() - prob.reference.masses).max()
            assert err <= 1e-7
            assert res.plan.flows.min() >= 0.0
            assert res.histogram.masses.min() >= 0.0
            assert abs(res.x_a[0] - res.histogram.mean()) <= 1e-9

    def test_objective_not_worse_than_product_coupling(self):
        rng = np.random.default_rng(104)
        prob = self._problem(rng, lam=5.0)
        qp = assemble_wmvda_qp(prob)
        res = wm_vda(prob)
        coupling = np.tile(prob.reference.masses / prob.grid.k, (prob.grid.k, 1)).ravel()
        assert res.diagnostics["objective"] <= qp.objective(coupling) + 1e-8

    def test_lambda_continuity(self):
        rng = np.random.default_rng(105)
        lam = 5.0
        prob_a = self._problem(rng, lam=lam)
        rng = np.random.default_rng(105)
        prob_b = self._problem(rng, lam=lam * (1 + 1e-6))
        xa = wm_vda(prob_a).x_a[0]
        xb = wm_vda(prob_b).x_a[0]
        assert abs(xa - xb) <= 1e-3

    def test_w2_to_reference_nonincreasing_in_lambda(self):
        dists = []
        for lam in (0.1, 1.0, 5.0, 50.0, 1000.0):
            rng = np.random.default_rng(106)
            prob = self._problem(rng, lam=lam)
            res = wm_vda(prob)
            dists.append(wasserstein(res.histogram, prob.reference))
        # distances shrink to solver noise at large lambda; compare with an
        # absolute slack consistent with the transport tolerances
        assert all(d2 <= d1 + 1e-5 for d1, d2 in zip(dists, dists[1:]))

    def test_degenerate_reference_is_well_posed(self):
        grid = build_grid(-5, 5, 21)
        masses = np.zeros(21)
        masses[8] = 1.0
        ref = ProbabilityHistogram(grid, masses)
        prob = WmVdaProblem(_scalar_input(2.0, 1.0), ref, grid, lam=0.5)
        res = wm_vda(prob)
        assert np.allclose(res.plan.target_marginal(), masses, atol=1e-9)


class TestCdfMatchBaseline:
    def _hist(self, rng, mu, var, grid):
        return _empirical_reference(rng, mu, var, grid, n=2000)

    def test_identical_histograms_reduce_to_plain_analysis(self):
        rng = np.random.default_rng(7)
        grid = build_grid(-6, 6, 61)
        h = self._hist(rng, 0.0, 2.0, grid)
        res = cdf_match_then_3dvar(0.4, -0.2, h, h, h, H=1.0, B=1.5, R=0.75)
        ref = three_d_var(_scalar_input(0.4, -0.2, B=1.5, R=0.75))
        assert res.x_a[0] == pytest.approx(ref.x_a[0], abs=1e-9)

    def test_shifted_model_histogram_removes_bias(self):
        rng = np.random.default_rng(8)
        beta = 2.0
        grid = build_grid(-6, 6, 121)
        ref_h = self._hist(rng, 0.0, 2.0, grid)
        model_h = ProbabilityHistogram(grid.shifted(beta), ref_h.masses)
        res = cdf_match_then_3dvar(1.2 + beta, 0.0, model_h, ref_h, ref_h, B=1.0, R=1e12)
        assert abs(res.diagnostics["x_b_mapped"] - 1.2) <= grid.spacing

    def test_degenerate_observation_histogram(self):
        rng = np.random.default_rng(9)
        grid = build_grid(-4, 4, 41)
        ref_h = self._hist(rng, 0.0, 1.5, grid)
        masses = np.zeros(41)
        masses[5] = 1.0
        degenerate = ProbabilityHistogram(grid, masses)
        res = cdf_match_then_3dvar(0.0, 3.0, ref_h, degenerate, ref_h)
        assert np.isfinite(res.x_a[0])
        assert res.diagnostics["y_mapped"] == pytest.approx(ref_h.quantile(0.5))
