import logging

import numpy as np
import pytest

from wassda.errors import InfeasibleError
from wassda.oracles import active_set_reference, transport_bruteforce
from wassda.qpsolve import (
    DenseConstraints,
    DenseQuadratic,
    LowRankQuadratic,
    MarginalConstraints,
    QuadraticProgram,
    feasibility_check,
    solve_qp,
)


def _transport_program(px, pz, cost):
    px = np.asarray(px, dtype=float)
    pz = np.asarray(pz, dtype=float)
    drop = int(np.argmax(pz))
    cons = MarginalConstraints(px.size, pz.size, True, True, drop_col=drop)
    b = np.concatenate([px, np.delete(pz, drop)])
    return QuadraticProgram(None, np.asarray(cost, dtype=float).ravel(), cons, b)


class TestSolveQp:
    def test_symmetric_quadratic(self):
        qp = QuadraticProgram(np.eye(2), [-1.0, -1.0], [[1.0, 1.0]], [1.0])
        sol = solve_qp(qp)
        assert sol.status == "converged"
        assert np.allclose(sol.u, [0.5, 0.5], atol=1e-7)

    def test_lp_corner(self):
        qp = QuadraticProgram(None, [1.0, 2.0], [[1.0, 1.0]], [1.0])
        sol = solve_qp(qp)
        assert sol.status == "converged"
        assert np.allclose(sol.u, [1.0, 0.0], atol=1e-6)
        assert sol.objective == pytest.approx(1.0, abs=1e-6)

    def test_matches_active_set_oracle_on_random_qps(self):
        rng = np.random.default_rng(2024)
        for _ in range(12):
            n = 6
            G = rng.normal(size=(n, n))
            Q = G.T @ G + 0.5 * np.eye(n)
            c = rng.normal(size=n)
            A = np.vstack([np.ones(n), rng.uniform(0.2, 1.0, size=n)])
            u0 = rng.uniform(0.1, 1.0, size=n)
            b = A @ u0
            qp = QuadraticProgram(Q, c, A, b)
            sol = solve_qp(qp)
            assert sol.status == "converged"
            ref_obj, _ = active_set_reference(Q, c, A, b)
            assert sol.objective == pytest.approx(ref_obj, abs=1e-6)

    def test_lp_matches_transport_enumeration(self):
        rng = np.random.default_rng(5)
        for _ in range(6):
            k, l = int(rng.integers(2, 5)), int(rng.integers(2, 5))
            px = rng.integers(1, 5, size=k).astype(float)
            px /= px.sum()
            pz = rng.integers(1, 5, size=l).astype(float)
            pz /= pz.sum()
            xs = np.sort(rng.uniform(-2, 2, k))
            zs = np.sort(rng.uniform(-2, 2, l))
            cost = np.abs(xs[:, None] - zs[None, :]) ** 2
            sol = solve_qp(_transport_program(px, pz, cost))
            assert sol.status == "converged"
            ref = transport_bruteforce(px, pz, cost)
            assert sol.objective == pytest.approx(ref, abs=1e-6)

    def test_quarter_mass_instances_match_enumeration(self):
        cases = [
            ([0.25, 0.75], [0.5, 0.5]),
            ([0.25, 0.25, 0.5], [0.75, 0.25]),
            ([0.25, 0.25, 0.25, 0.25], [0.5, 0.25, 0.25]),
        ]
        xs = np.array([0.0, 1.0, 2.0, 3.0])
        for px, pz in cases:
            px, pz = np.array(px), np.array(pz)
            cost = np.abs(xs[: px.size, None] - xs[None, : pz.size]) ** 2
            sol = solve_qp(_transport_program(px, pz, cost))
            ref = transport_bruteforce(px, pz, cost)
            assert sol.objective == pytest.approx(ref, abs=1e-6)

    def test_bitwise_determinism(self):
        rng = np.random.default_rng(77)
        G = rng.normal(size=(8, 8))
        Q = G.T @ G
        c = rng.normal(size=8)
        A = np.vstack([np.ones(8), rng.uniform(0.5, 1.5, 8)])
        b = A @ rng.uniform(0.1, 1.0, 8)
        qp = QuadraticProgram(Q, c, A, b)
        s1 = solve_qp(qp)
        s2 = solve_qp(qp)
        assert np.array_equal(s1.u, s2.u)
        assert s1.objective == s2.objective
        assert s1.duality_gap == s2.duality_gap
        assert s1.iterations == s2.iterations

    def test_gap_history_nonincreasing(self):
        rng = np.random.default_rng(3)
        for _ in range(8):
            k = int(rng.integers(3, 12))
            px = rng.dirichlet(np.full(k, 1.0))
            pz = rng.dirichlet(np.full(k, 1.0))
            xs = np.linspace(0, 1, k)
            cost = (xs[:, None] - xs[None, :]) ** 2
            sol = solve_qp(_transport_program(px, pz, cost))
            gaps = sol.gap_history
            assert np.all(np.diff(gaps) <= 1e-9 * (1.0 + gaps[:-1]))

    def test_kkt_residuals_scaled(self):
        qp = QuadraticProgram(np.eye(3), [-1.0, 0.5, 2.0], [[1.0, 1.0, 1.0]], [1.0])
        sol = solve_qp(qp)
        assert sol.status == "converged"
        assert np.all(sol.u >= -1e-9)
        assert sol.primal_residual <= 1e-7
        assert sol.dual_residual <= 1e-7 * (1 + np.abs(sol.u).max())
        assert sol.duality_gap <= 1e-7 * (1 + abs(sol.objective))

    def test_zero_mass_bins_presolved(self):
        px = np.array([0.5, 0.0, 0.5])
        pz = np.array([0.0, 1.0, 0.0])
        xs = np.array([0.0, 1.0, 2.0])
        cost = np.abs(xs[:, None] - xs[None, :]) ** 2
        sol = solve_qp(_transport_program(px, pz, cost))
        assert sol.status == "converged"
        U = sol.u.reshape(3, 3)
        assert np.allclose(U.sum(axis=1), px, atol=1e-8)
        assert np.allclose(U.sum(axis=0), pz, atol=1e-8)
        assert U[1].max() == 0.0  # presolved-out row is exactly zero
        assert sol.objective == pytest.approx(0.5 * 1 + 0.5 * 1, abs=1e-6)

    def test_trace_logged_when_verbose(self, caplog):
        qp = QuadraticProgram(np.eye(2), [-1.0, -1.0], [[1.0, 1.0]], [1.0])
        with caplog.at_level(logging.DEBUG, logger="wassda.qpsolve"):
            solve_qp(qp)
        assert any("ipm iter" in rec.message for rec in caplog.records)


class TestFeasibilityCheck:
    def test_product_coupling(self):
        cons = MarginalConstraints(2, 2, True, True, drop_col=0)
        b = np.array([0.5, 0.5, 0.5])
        u0 = feasibility_check(cons, b, 4)
        assert np.allclose(u0, 0.25)

    def test_negative_marginal_infeasible(self):
        cons = MarginalConstraints(2, 2, True, True)
        b = np.array([0.5, 0.5, -0.1, 1.1])
        with pytest.raises(InfeasibleError) as exc:
            feasibility_check(cons, b, 4)
        assert exc.value.index is not None

    def test_mass_mismatch_infeasible(self):
        cons = MarginalConstraints(2, 2, True, True)
        b = np.array([0.5, 0.5, 0.9, 0.9])
        with pytest.raises(InfeasibleError):
            feasibility_check(cons, b, 4)

    def test_dense_feasible_point(self):
        A = np.array([[1.0, 1.0, 1.0]])
        u0 = feasibility_check(A, np.array([1.0]), 3)
        assert np.allclose(A @ u0, 1.0, atol=1e-9)
        assert np.all(u0 > 0)

    def test_dense_infeasible(self):
        A = np.array([[1.0, 1.0], [1.0, 1.0]])
        with pytest.raises(InfeasibleError):
            feasibility_check(A, np.array([1.0, 2.0]), 2)


class TestConstraintOperators:
    @pytest.mark.parametrize(
        "rows,cols,drop", [(True, True, 2), (True, True, None), (False, True, None), (True, False, None)]
    )
    def test_marginal_ops_match_dense(self, rows, cols, drop):
        rng = np.random.default_rng(42)
        k, l = 4, 5
        cons = MarginalConstraints(k, l, rows, cols, drop_col=drop)
        A = cons.to_dense()
        u = rng.uniform(0.0, 1.0, k * l)
        y = rng.normal(size=cons.m_eq)
        w = rng.uniform(0.1, 2.0, k * l)
        assert np.allclose(cons.matvec(u), A @ u)
        assert np.allclose(cons.rmatvec(y), A.T @ y)
        assert np.allclose(cons.gram(w), (A * w) @ A.T)

    def test_marginal_presolve_reduces(self):
        cons = MarginalConstraints(3, 3, True, True, drop_col=1)
        px = np.array([0.5, 0.0, 0.5])
        pz = np.array([0.25, 0.5, 0.25])
        b = np.concatenate([px, np.delete(pz, 1)])
        keep, reduced, b_r = cons.presolve(b)
        assert keep.sum() == 2 * 3
        assert reduced.k == 2 and reduced.l == 3
        row_m, col_m = reduced.marginals(b_r)
        assert np.allclose(row_m, [0.5, 0.5])
        assert np.allclose(col_m, pz)

    def test_lowrank_quadratic_matches_dense(self):
        rng = np.random.default_rng(8)
        F = rng.normal(size=(2, 7))
        W = np.diag([1.5, 0.5])
        lr = LowRankQuadratic(F, W)
        dense = DenseQuadratic(lr.to_dense())
        u = rng.normal(size=7)
        assert np.allclose(lr.matvec(u), dense.matvec(u))
        assert lr.quad(u) == pytest.approx(dense.quad(u))

    def test_lowrank_solver_path_matches_dense_path(self):
        rng = np.random.default_rng(9)
        k = 6
        xs = np.linspace(-1, 1, k)
        F = np.repeat(xs, k)[None, :]
        W = np.array([[3.0]])
        pref = rng.dirichlet(np.full(k, 2.0))
        cost = (xs[:, None] - xs[None, :]) ** 2
        c = 0.7 * cost.ravel() - 1.1 * F[0]
        cons = MarginalConstraints(k, k, False, True)
        qp_lr = QuadraticProgram(LowRankQuadratic(F, W), c, cons, pref)
        qp_dense = QuadraticProgram(F.T @ W @ F, c, cons.to_dense(), pref)
        s1 = solve_qp(qp_lr)
        s2 = solve_qp(qp_dense)
        assert s1.status == s2.status == "converged"
        assert s1.objective == pytest.approx(s2.objective, abs=1e-7)
        assert np.allclose(s1.u, s2.u, atol=1e-5)


class TestQuadraticProgramValidation:
    def test_rejects_asymmetric_q(self):
        with pytest.raises(ValueError):
            QuadraticProgram(np.array([[1.0, 0.5], [0.0, 1.0]]), [0.0, 0.0], [[1.0, 1.0]], [1.0])

    def test_rejects_dim_mismatch(self):
        with pytest.raises(ValueError):
            QuadraticProgram(np.eye(2), [0.0, 0.0, 0.0], [[1.0, 1.0]], [1.0])

    def test_construction_runs_phase1(self):
        with pytest.raises(InfeasibleError):
            QuadraticProgram(None, [1.0, 1.0], [[1.0, 1.0], [1.0, 1.0]], [1.0, 2.0])
