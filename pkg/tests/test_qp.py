import numpy as np
import pytest

from yawmpc.qp import STATUS_MAX_ITERATIONS, STATUS_OPTIMAL, QpProblem, solve_qp

from qp_oracle import projected_gradient_solve


def random_problem(rng, n=4, q=4, slack_lo=0.0, slack_hi=1.0):
    m = rng.normal(size=(n, n))
    h_mat = m @ m.T + np.eye(n)
    f_vec = rng.normal(size=n) * 3.0
    g_mat = rng.normal(size=(q, n))
    z_feas = rng.normal(size=n)
    h_vec = g_mat @ z_feas + rng.uniform(slack_lo, slack_hi, size=q)
    return QpProblem(h_mat, f_vec, g_mat, h_vec), z_feas


class TestProblemValidation:
    def test_rejects_asymmetric_hessian(self):
        h = np.array([[1.0, 0.5], [0.0, 1.0]])
        with pytest.raises(ValueError):
            QpProblem(h, np.zeros(2), np.zeros((1, 2)), np.zeros(1))

    def test_rejects_indefinite_hessian(self):
        h = np.diag([1.0, -1.0])
        with pytest.raises(ValueError):
            QpProblem(h, np.zeros(2), np.zeros((1, 2)), np.zeros(1))

    def test_rejects_dimension_mismatch(self):
        with pytest.raises(ValueError):
            QpProblem(np.eye(2), np.zeros(3), np.zeros((1, 2)), np.zeros(1))
        with pytest.raises(ValueError):
            QpProblem(np.eye(2), np.zeros(2), np.zeros((2, 2)), np.zeros(1))


class TestSolve:
    def test_unconstrained_minimum_at_origin(self):
        problem = QpProblem(np.eye(4), np.zeros(4), np.zeros((1, 4)), np.ones(1))
        sol = solve_qp(problem)
        assert sol.status == STATUS_OPTIMAL
        np.testing.assert_array_equal(sol.z_vec, np.zeros(4))

    def test_single_clamped_coordinate(self):
        # minimize 0.5 z'z - 2 z1 subject to z1 <= 1: clamp at z1 = 1
        g = np.zeros((1, 4))
        g[0, 0] = 1.0
        problem = QpProblem(np.eye(4), np.array([-2.0, 0, 0, 0]), g, np.ones(1))
        sol = solve_qp(problem)
        np.testing.assert_allclose(sol.z_vec, [1.0, 0, 0, 0], atol=1e-12)
        assert sol.objective == pytest.approx(-1.5, abs=1e-12)

    def test_slack_constraints_reduce_to_linear_solve(self):
        rng = np.random.default_rng(21)
        for _ in range(50):
            problem, _ = random_problem(rng)
            wide = QpProblem(problem.h_mat, problem.f_vec, problem.g_mat, problem.h_vec + 1e9)
            sol = solve_qp(wide)
            oracle = np.linalg.solve(problem.h_mat, -problem.f_vec)
            np.testing.assert_allclose(sol.z_vec, oracle, rtol=1e-8)

    def test_matches_projected_gradient_oracle(self):
        rng = np.random.default_rng(22)
        for _ in range(100):
            problem, z_feas = random_problem(rng)
            sol = solve_qp(problem, z0=z_feas)
            assert sol.status == STATUS_OPTIMAL
            z_pg, _ = projected_gradient_solve(
                problem.h_mat, problem.f_vec, problem.g_mat, problem.h_vec
            )
            scale = max(1.0, float(np.linalg.norm(z_pg)))
            assert np.linalg.norm(sol.z_vec - z_pg) <= 1e-6 * scale

    def test_solution_always_feasible(self):
        rng = np.random.default_rng(23)
        for _ in range(200):
            problem, z_feas = random_problem(rng, q=int(rng.integers(2, 10)))
            sol = solve_qp(problem, z0=z_feas)
            assert sol.status == STATUS_OPTIMAL
            violation = problem.g_mat @ sol.z_vec - problem.h_vec
            assert np.max(violation) <= 1e-9 * max(1.0, np.max(np.abs(problem.h_vec)))

    def test_optimality_certificate(self):
        rng = np.random.default_rng(24)
        problem, z_feas = random_problem(rng)
        sol = solve_qp(problem, z0=z_feas)

        def objective(z):
            return 0.5 * z @ problem.h_mat @ z + problem.f_vec @ z

        eps = 1e-4
        checked = 0
        while checked < 1000:
            d = rng.normal(size=4)
            z_pert = sol.z_vec + eps * d / np.linalg.norm(d)
            if np.all(problem.g_mat @ z_pert <= problem.h_vec):
                assert objective(z_pert) >= sol.objective - 1e-10
                checked += 1

    def test_deterministic(self):
        rng = np.random.default_rng(25)
        problem, z_feas = random_problem(rng)
        a = solve_qp(problem, z0=z_feas)
        b = solve_qp(problem, z0=z_feas)
        assert np.array_equal(a.z_vec, b.z_vec)
        assert a.objective == b.objective
        assert a.iterations == b.iterations

    def test_kkt_stationarity_residual(self):
        # the gradient at the solution must lie in the cone of the active
        # constraint normals: nonnegative multipliers from a least-squares
        # fit leave a residual at solver precision
        rng = np.random.default_rng(26)
        for _ in range(100):
            problem, z_feas = random_problem(rng)
            sol = solve_qp(problem, z0=z_feas)
            grad = problem.h_mat @ sol.z_vec + problem.f_vec
            slack = problem.h_vec - problem.g_mat @ sol.z_vec
            active = np.nonzero(slack <= 1e-7 * (1.0 + np.abs(problem.h_vec)))[0]
            scale = max(1.0, float(np.max(np.abs(grad))))
            if active.size == 0:
                assert np.max(np.abs(grad)) <= 1e-8 * scale
                continue
            g_active = problem.g_mat[active]
            lam, *_ = np.linalg.lstsq(g_active.T, -grad, rcond=None)
            assert np.min(lam) >= -1e-7
            residual = grad + g_active.T @ lam
            assert np.max(np.abs(residual)) <= 1e-8 * scale

    def test_iteration_budget_exhaustion_reported(self):
        rng = np.random.default_rng(27)
        problem, z_feas = random_problem(rng, slack_lo=0.0, slack_hi=0.0)
        sol = solve_qp(problem, max_iterations=1, z0=z_feas)
        assert sol.status in (STATUS_OPTIMAL, STATUS_MAX_ITERATIONS)
        forced = solve_qp(problem, max_iterations=0, z0=z_feas)
        assert forced.status == STATUS_MAX_ITERATIONS

    def test_phase_one_start_when_origin_infeasible(self):
        # constraints exclude both the origin and the unconstrained minimum
        h_mat = np.eye(2)
        f_vec = np.zeros(2)
        g_mat = np.array([[-1.0, 0.0], [0.0, -1.0]])
        h_vec = np.array([-1.0, -1.0])  # z >= 1 componentwise
        sol = solve_qp(QpProblem(h_mat, f_vec, g_mat, h_vec))
        np.testing.assert_allclose(sol.z_vec, [1.0, 1.0], atol=1e-9)
