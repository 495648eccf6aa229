import numpy as np
import pytest

import dzoa
from dzoa.errors import DimensionMismatch, DomainError, ZeroReference

from conftest import tiny_instance


def soft(z, tau):
    return np.sign(z) * np.maximum(np.abs(z) - tau, 0.0)


class TestSolveLassoCentralized:
    def test_identity_design_is_soft_thresholding(self):
        # argmin ||beta - y||^2 + eta ||beta||_1 has the closed form
        # soft(y, eta/2) coordinate-wise.
        y = np.array([1.5, -0.2, 0.0, 0.9])
        out = dzoa.solve_lasso_centralized(np.eye(4), y, eta=1.0, tol=1e-12)
        assert out == pytest.approx(soft(y, 0.5), abs=1e-9)

    def test_heavy_regularization_zeroes_everything(self, rng):
        X = rng.normal(size=(12, 3))
        y = rng.normal(size=12)
        eta = 4.0 * np.abs(X.T @ y).max()  # beyond the shrink-to-zero threshold
        out = dzoa.solve_lasso_centralized(X, y, eta, tol=1e-12)
        assert np.all(out == 0.0)

    def test_matches_brute_force_grid(self, rng):
        X = rng.normal(size=(10, 2))
        y = rng.normal(size=10)
        solver = dzoa.solve_lasso_centralized(X, y, eta=0.7, tol=1e-12)
        grid = dzoa.brute_force_lasso(X, y, eta=0.7, resolution=1e-3)
        assert solver == pytest.approx(grid, abs=2e-3)

    def test_satisfies_stationarity(self, rng):
        X = rng.normal(size=(15, 4))
        y = rng.normal(size=15)
        eta = 0.5
        beta = dzoa.solve_lasso_centralized(X, y, eta, tol=1e-12)
        residual_grad = 2.0 * X.T @ (X @ beta - y)
        for j in range(4):
            if beta[j] != 0.0:
                assert residual_grad[j] + eta * np.sign(beta[j]) == pytest.approx(
                    0.0, abs=1e-6
                )
            else:
                assert abs(residual_grad[j]) <= eta + 1e-6

    def test_unregularized_matches_least_squares(self, rng):
        X = rng.normal(size=(20, 3))
        y = rng.normal(size=20)
        out = dzoa.solve_lasso_centralized(X, y, eta=0.0, tol=1e-12)
        direct, *_ = np.linalg.lstsq(X, y, rcond=None)
        assert out == pytest.approx(direct, abs=1e-8)

    def test_rejects_negative_eta(self):
        with pytest.raises(DomainError):
            dzoa.solve_lasso_centralized(np.eye(2), np.ones(2), eta=-0.1)


class TestBruteForceLasso:
    def test_one_dimensional_matches_solver(self, rng):
        X = rng.normal(size=(8, 1))
        y = rng.normal(size=8)
        grid = dzoa.brute_force_lasso(X, y, eta=0.3, resolution=1e-3)
        solver = dzoa.solve_lasso_centralized(X, y, eta=0.3, tol=1e-12)
        assert grid == pytest.approx(solver, abs=2e-3)

    def test_refuses_more_than_two_features(self):
        with pytest.raises(DimensionMismatch):
            dzoa.brute_force_lasso(np.eye(3), np.ones(3), eta=0.1)


class TestConsensusReference:
    def test_is_the_summed_objective_minimizer(self):
        # Independent of the solver route: no feasible perturbation of the
        # consensus point may lower sum_k f_k.
        graph, dataset, problem, _ = tiny_instance()
        beta_c = dzoa.consensus_reference(problem, dataset, tol=1e-12)
        stack = np.tile(beta_c, (dataset.num_agents, 1))
        f_star = dzoa.consensus_objective(problem, dataset, stack)
        rng = np.random.default_rng(0)
        for _ in range(40):
            step = rng.normal(size=beta_c.shape)
            step *= 1e-4 / np.linalg.norm(step)
            cand = np.tile(beta_c + step, (dataset.num_agents, 1))
            assert dzoa.consensus_objective(problem, dataset, cand) >= f_star - 1e-12

    def test_matches_rescaled_centralized_solve(self):
        graph, dataset, problem, _ = tiny_instance()
        x_rows, y_rows = [], []
        for k in range(1, dataset.num_agents + 1):
            x_k, y_k = dataset.block(k)
            x_rows.append(x_k / np.sqrt(x_k.shape[0]))
            y_rows.append(y_k / np.sqrt(x_k.shape[0]))
        direct = dzoa.solve_lasso_centralized(
            np.vstack(x_rows), np.concatenate(y_rows), problem.eta, tol=1e-12
        )
        assert dzoa.consensus_reference(problem, dataset, tol=1e-12) == pytest.approx(
            direct, abs=1e-9
        )


class TestNormalizedError:
    def test_all_zero_state_scores_the_agent_count(self):
        beta_c = np.array([0.3, -0.4])
        zeros = np.zeros((5, 2))
        assert dzoa.normalized_error(zeros, beta_c) == pytest.approx(5.0)

    def test_single_vector_input(self):
        beta_c = np.array([1.0, 0.0])
        assert dzoa.normalized_error(np.array([0.0, 1.0]), beta_c) == pytest.approx(2.0)

    def test_exact_agreement_scores_zero(self):
        beta_c = np.array([0.5, 0.5, -1.0])
        assert dzoa.normalized_error(np.tile(beta_c, (4, 1)), beta_c) == 0.0

    def test_zero_reference_rejected(self):
        with pytest.raises(ZeroReference):
            dzoa.normalized_error(np.ones((2, 2)), np.zeros(2))


class TestTheorem3Bound:
    def inputs(self, **overrides):
        base = dict(
            q0_minus_q_g_sq=2.0, num_outer=100, rho=4.0, c1=1.0, p=10,
            nk=2, n_samples=20, epsilon=0.5, delta=1e-3,
            lambda_max_lplus=2.0, lambda_min_nonzero_lminus=1.0,
        )
        base.update(overrides)
        return dzoa.BoundInputs(**base)

    def test_worked_example(self):
        # floor = 2.1*10*4*ln(1250)*4 / (2*16*4*400*0.25*1) = 0.1871859...
        # plus the transient 2/100
        assert dzoa.theorem3_bound(self.inputs()) == pytest.approx(
            0.2071859, rel=1e-5
        )

    def test_transient_vanishes_with_rounds(self):
        floor = dzoa.theorem3_bound(self.inputs(num_outer=10**9)) - 2.0 / 10**9
        many = [dzoa.theorem3_bound(self.inputs(num_outer=m)) for m in (1, 10, 1000)]
        assert all(a > b for a, b in zip(many, many[1:]))
        assert many[-1] == pytest.approx(floor + 2.0 / 1000, rel=1e-9)

    def test_halving_epsilon_quadruples_the_floor(self):
        transient = 2.0 / 100
        floor = dzoa.theorem3_bound(self.inputs()) - transient
        floor_half = dzoa.theorem3_bound(self.inputs(epsilon=0.25)) - transient
        assert floor_half == pytest.approx(4 * floor, rel=1e-9)

    def test_rejects_bad_inputs(self):
        with pytest.raises(DomainError):
            self.inputs(epsilon=1.5)
        with pytest.raises(DomainError):
            self.inputs(q0_minus_q_g_sq=-1.0)
        with pytest.raises(DomainError):
            self.inputs(num_outer=0)


class TestInnerBound:
    def cfg(self, alpha0=1.0, T=100):
        return dzoa.ZoConfig(u1=1.0, T=T, J=30, alpha0=alpha0, P=10,
                             R_bound=1.0, L_lipschitz=1.0)

    def test_worked_example(self):
        # 0.5 * sqrt(10)/10 * (sqrt(ln 20) + ln(200)/10) evaluated directly
        expected = 0.5 * np.sqrt(10) / 10 * (
            np.sqrt(np.log(20.0)) + np.log(200.0) / 10
        )
        assert expected == pytest.approx(0.35744, rel=1e-4)
        assert dzoa.inner_bound(self.cfg()) == pytest.approx(expected, rel=1e-12)

    def test_symmetric_in_alpha0_inversion(self):
        assert dzoa.inner_bound(self.cfg(alpha0=2.0)) == pytest.approx(
            dzoa.inner_bound(self.cfg(alpha0=0.5))
        )
        assert dzoa.inner_bound(self.cfg(alpha0=2.0)) > dzoa.inner_bound(
            self.cfg(alpha0=1.0)
        )

    def test_shrinks_with_more_steps(self):
        assert dzoa.inner_bound(self.cfg(T=400)) < dzoa.inner_bound(self.cfg(T=100))

    def test_step_count_override(self):
        assert dzoa.inner_bound(self.cfg(T=100), t_steps=400) == pytest.approx(
            dzoa.inner_bound(self.cfg(T=400))
        )

    def test_rejects_unusable_configs(self):
        with pytest.raises(DomainError):
            dzoa.inner_bound(self.cfg(), t_steps=0)
        bare = dzoa.ZoConfig(u1=1.0, T=10, J=2, alpha0=1.0, P=4, R_bound=None)
        with pytest.raises(DomainError):
            dzoa.inner_bound(bare)


class TestGapVsMExperiment:
    def run_tiny(self):
        graph = dzoa.build_graph(3, ((1, 2), (2, 3), (3, 1)))
        problem = dzoa.ErmProblem(eta=0.5, c1=1.0, num_agents=3)
        zo = dzoa.ZoConfig(u1=0.5, T=20, J=3, alpha0=1.0, P=2,
                           R_bound=1.0, L_lipschitz=1.0)
        return dzoa.gap_vs_M_experiment(
            problem, graph, zo, rho=1.0, outer_counts=(2, 5), seeds=(0, 1),
            samples_per_agent=4, noise_std=0.3, epsilon=0.5, delta=1e-3,
            oracle_tol=1e-10,
        )

    def test_row_grid_and_bound_structure(self):
        rows = self.run_tiny()
        assert [(r.num_outer, r.seed) for r in rows] == [
            (2, 0), (5, 0), (2, 1), (5, 1)
        ]
        by_seed = {}
        for r in rows:
            by_seed.setdefault(r.seed, []).append(r)
        for seed_rows in by_seed.values():
            # same run, same q0 term; the transient makes the bound shrink
            assert seed_rows[0].q0_term == seed_rows[1].q0_term
            assert seed_rows[0].bound > seed_rows[1].bound
            for r in seed_rows:
                assert r.gap <= r.bound

    def test_deterministic(self):
        a = self.run_tiny()
        b = self.run_tiny()
        assert [(r.gap, r.bound) for r in a] == [(r.gap, r.bound) for r in b]

    def test_rejects_empty_outer_count(self):
        graph = dzoa.build_graph(2, ((1, 2),))
        problem = dzoa.ErmProblem(eta=0.5, c1=1.0, num_agents=2)
        zo = dzoa.ZoConfig(u1=0.5, T=5, J=2, alpha0=1.0, P=2,
                           R_bound=1.0, L_lipschitz=1.0)
        with pytest.raises(DomainError):
            dzoa.gap_vs_M_experiment(
                problem, graph, zo, rho=1.0, outer_counts=(0, 5), seeds=(0,),
                samples_per_agent=4, noise_std=0.3, epsilon=0.5, delta=1e-3,
            )
