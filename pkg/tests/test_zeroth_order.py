import logging

import numpy as np
import pytest

import dzoa
from dzoa.errors import DomainError, NonFiniteIterate


def make_cfg(**overrides):
    base = dict(u1=1.0, T=50, J=10, alpha0=1.0, P=2, R_bound=1.0, L_lipschitz=1.0)
    base.update(overrides)
    return dzoa.ZoConfig(**base)


class CountingOracle:
    """Value oracle that counts evaluations (batched calls count per row)."""

    def __init__(self, fn):
        self.fn = fn
        self.calls = 0

    def __call__(self, w):
        w = np.asarray(w)
        self.calls += 1 if w.ndim == 1 else w.shape[0]
        return self.fn(w)


class TestTwoPointEstimate:
    def test_constant_function_gives_zero(self, rng):
        f = lambda w: np.full(np.asarray(w).shape[:-1], 3.7)
        g = dzoa.two_point_estimate(f, np.zeros(3), 0.1, 0.05,
                                    rng.standard_normal(3), rng.standard_normal(3))
        assert np.array_equal(g, np.zeros(3))

    def test_linear_function_exact(self):
        a = np.array([1.0, 0.0])
        f = lambda w: np.asarray(w) @ a
        g = dzoa.two_point_estimate(f, np.array([5.0, -2.0]), 0.3, 0.07,
                                    np.array([0.9, -1.1]), np.array([1.0, 1.0]))
        assert np.allclose(g, np.array([1.0, 1.0]), atol=1e-9)

    def test_quadratic_worked_example(self):
        f = lambda w: float(np.asarray(w) @ np.asarray(w))
        g = dzoa.two_point_estimate(
            f, np.array([1.0, 0.0]), 0.1, 0.05, np.zeros(2), np.array([1.0, 0.0])
        )
        assert np.allclose(g, np.array([2.05, 0.0]), atol=1e-12)

    def test_exactly_two_oracle_evaluations(self, rng):
        oracle = CountingOracle(lambda w: np.sum(np.square(w), axis=-1))
        dzoa.two_point_estimate(oracle, np.zeros(4), 0.2, 0.1,
                                rng.standard_normal(4), rng.standard_normal(4))
        assert oracle.calls == 2

    def test_nonpositive_radii_rejected(self, rng):
        f = lambda w: 0.0
        with pytest.raises(DomainError):
            dzoa.two_point_estimate(f, np.zeros(2), 0.0, 0.1,
                                    rng.standard_normal(2), rng.standard_normal(2))
        with pytest.raises(DomainError):
            dzoa.two_point_estimate(f, np.zeros(2), 0.1, -0.1,
                                    rng.standard_normal(2), rng.standard_normal(2))


class TestAveragedGradient:
    def test_j_one_reduces_to_single_estimate(self):
        cfg = make_cfg(J=1, P=3)
        f = lambda w: np.sum(np.square(w), axis=-1)
        w = np.array([0.3, -0.2, 0.9])
        sample = dzoa.averaged_gradient(f, w, 2, cfg, np.random.default_rng(5))
        assert sample.nu1.shape == (1, 3) and sample.nu2.shape == (1, 3)
        # replay the same stream by hand
        rng = np.random.default_rng(5)
        nu1 = rng.standard_normal((1, 3))
        nu2 = rng.standard_normal((1, 3))
        u1t, u2t = dzoa.smoothing_radii(cfg, 2)
        manual = dzoa.two_point_estimate(f, w, u1t, u2t, nu1[0], nu2[0])
        assert np.allclose(sample.g, manual, atol=1e-12)

    def test_linear_mean_concentrates(self):
        a = np.array([2.0, -1.0, 0.5, 0.0])
        cfg = make_cfg(J=10_000, P=4)
        f = lambda w: np.asarray(w) @ a
        sample = dzoa.averaged_gradient(f, np.zeros(4), 1, cfg,
                                        np.random.default_rng(0))
        # estimator is (a . nu2) nu2 for linear f: mean a, per-coordinate
        # variance <= (||a||^2 + 2 a_i^2) / J
        stderr = np.sqrt((a @ a + 2 * a**2) / cfg.J)
        assert np.all(np.abs(sample.g - a) <= 5 * stderr)

    def test_oracle_call_budget(self):
        cfg = make_cfg(J=7, P=2)
        oracle = CountingOracle(lambda w: np.sum(np.square(w), axis=-1))
        dzoa.averaged_gradient(oracle, np.zeros(2), 1, cfg, np.random.default_rng(1))
        assert oracle.calls == 2 * cfg.J

    def test_deterministic_for_fixed_seed(self):
        cfg = make_cfg(J=5, P=3)
        f = lambda w: np.sum(np.square(w), axis=-1)
        g1 = dzoa.averaged_gradient(f, np.ones(3), 3, cfg, np.random.default_rng(9)).g
        g2 = dzoa.averaged_gradient(f, np.ones(3), 3, cfg, np.random.default_rng(9)).g
        assert np.array_equal(g1, g2)


class TestSchedules:
    def test_step_size_worked_example(self):
        cfg = make_cfg(P=10)
        assert dzoa.step_size(1, cfg) == pytest.approx(
            1.0 / np.sqrt(10 * np.log(20)), rel=1e-12
        )
        assert dzoa.step_size(1, cfg) == pytest.approx(0.18271, abs=1e-5)

    def test_step_size_scalings(self):
        cfg = make_cfg(P=10)
        assert dzoa.step_size(4, cfg) == pytest.approx(0.5 * dzoa.step_size(1, cfg))
        cfg2 = make_cfg(P=10, alpha0=2.0)
        assert dzoa.step_size(3, cfg2) == pytest.approx(2 * dzoa.step_size(3, cfg))

    def test_smoothing_radii_unclamped(self):
        cfg = make_cfg(u1=1.0, P=2)
        for t in (1, 2, 5):
            u1t, u2t = dzoa.smoothing_radii(cfg, t)
            assert u1t == pytest.approx(1.0 / t)
            assert u2t == pytest.approx(1.0 / (2 * t) ** 2)
            assert u2t <= u1t / 2

    def test_smoothing_clamped_for_p1_t1(self, caplog):
        cfg = make_cfg(u1=1.0, P=1)
        with caplog.at_level(logging.WARNING, logger="dzoa.zeroth_order"):
            u1t, u2t = dzoa.smoothing_radii(cfg, 1)
        assert u2t == pytest.approx(u1t / 2)
        assert any("clamp" in rec.message for rec in caplog.records)

    def test_schedule_inequality_holds_for_all_t(self):
        for p_dim in (1, 2, 7):
            cfg = make_cfg(u1=2.0, P=p_dim)
            for t in range(1, 40):
                u1t, u2t = dzoa.smoothing_radii(cfg, t)
                assert u2t <= u1t / 2 + 1e-15

    def test_resolve_radius(self):
        fixed = make_cfg(R_bound=3.0)
        assert dzoa.resolve_radius(fixed, np.ones(2)).R_bound == 3.0
        auto = make_cfg(R_bound=None)
        assert dzoa.resolve_radius(auto, np.zeros(2)).R_bound == 1.0
        resolved = dzoa.resolve_radius(auto, np.array([3.0, 4.0]))
        assert resolved.R_bound == pytest.approx(6.0)

    def test_config_validation(self):
        with pytest.raises(DomainError):
            make_cfg(u1=0.0)
        with pytest.raises(DomainError):
            make_cfg(T=-1)
        with pytest.raises(DomainError):
            make_cfg(J=0)
        with pytest.raises(DomainError):
            make_cfg(alpha0=0.0)
        with pytest.raises(DomainError):
            make_cfg(P=0)
        with pytest.raises(DomainError):
            make_cfg(L_lipschitz=0.0)

    def test_step_size_requires_resolved_radius(self):
        cfg = make_cfg(R_bound=None)
        with pytest.raises(DomainError):
            dzoa.step_size(1, cfg)


class TestInnerLoop:
    def quad(self, b):
        return lambda w: np.sum(np.square(np.asarray(w) - b), axis=-1)

    def test_t_zero_returns_origin(self):
        cfg = make_cfg(T=0, P=3)
        out = dzoa.inner_loop(self.quad(np.ones(3)), cfg, np.random.default_rng(0))
        assert np.array_equal(out.final, np.zeros(3))
        assert np.array_equal(out.average, np.zeros(3))

    def test_longer_horizon_improves_fixed_seed(self):
        b = np.array([0.7, -0.4])
        f = self.quad(b)
        short = dzoa.inner_loop(f, make_cfg(T=25, u1=0.1, alpha0=0.5),
                                np.random.default_rng(3))
        long = dzoa.inner_loop(f, make_cfg(T=400, u1=0.1, alpha0=0.5),
                               np.random.default_rng(3))
        assert f(long.final) < f(short.final)

    def test_average_tracks_final_region(self):
        b = np.array([0.5, 0.5])
        out = dzoa.inner_loop(self.quad(b), make_cfg(T=300, u1=0.1, alpha0=0.5),
                              np.random.default_rng(4))
        assert np.linalg.norm(out.average - b) < 0.3

    def test_deterministic(self):
        f = self.quad(np.array([1.0, 2.0]))
        a = dzoa.inner_loop(f, make_cfg(), np.random.default_rng(7))
        c = dzoa.inner_loop(f, make_cfg(), np.random.default_rng(7))
        assert np.array_equal(a.final, c.final)
        assert np.array_equal(a.average, c.average)

    def test_gap_shape_quarter_t(self):
        # expected-gap scaling check: gap(4T) <= 0.7 gap(T) on average
        b = np.array([0.8, -0.3])
        f = self.quad(b)
        gaps_t, gaps_4t = [], []
        for seed in range(50):
            small = dzoa.inner_loop(f, make_cfg(T=25, u1=0.1, alpha0=0.5),
                                    np.random.default_rng(seed))
            big = dzoa.inner_loop(f, make_cfg(T=100, u1=0.1, alpha0=0.5),
                                  np.random.default_rng(seed))
            gaps_t.append(f(small.average))
            gaps_4t.append(f(big.average))
        assert np.mean(gaps_4t) <= 0.7 * np.mean(gaps_t)

    def test_trace_collection(self):
        cfg = make_cfg(T=10)
        f = self.quad(np.ones(2))
        out = dzoa.inner_loop(f, cfg, np.random.default_rng(1), collect_trace=True)
        assert len(out.trace) == 10
        ts, g_norms, f_vals = zip(*out.trace)
        assert list(ts) == list(range(1, 11))
        assert all(g >= 0 for g in g_norms)
        assert all(np.isfinite(v) for v in f_vals)

    def test_trace_costs_one_extra_eval_per_step(self):
        cfg = make_cfg(T=6, J=4)
        plain = CountingOracle(lambda w: np.sum(np.square(w), axis=-1))
        dzoa.inner_loop(plain, cfg, np.random.default_rng(2))
        traced = CountingOracle(lambda w: np.sum(np.square(w), axis=-1))
        dzoa.inner_loop(traced, cfg, np.random.default_rng(2), collect_trace=True)
        assert plain.calls == 2 * cfg.J * cfg.T
        assert traced.calls == plain.calls + cfg.T

    @pytest.mark.filterwarnings("ignore::RuntimeWarning")
    def test_nonfinite_iterate_detected(self):
        cfg = make_cfg(T=30, alpha0=1e200)
        f = lambda w: np.sum(np.square(w), axis=-1) + 1.0
        with pytest.raises(NonFiniteIterate):
            dzoa.inner_loop(f, cfg, np.random.default_rng(0))

    def test_values_only_interface(self):
        # the loop runs against an oracle object exposing only __call__
        cfg = make_cfg(T=5)
        oracle = CountingOracle(lambda w: np.sum(np.square(w), axis=-1))
        out = dzoa.inner_loop(oracle, cfg, np.random.default_rng(0))
        assert np.all(np.isfinite(out.final))


class TestLipschitzDiagnostic:
    def test_linear_function_estimate(self, rng):
        a = np.array([3.0, -4.0])
        f = lambda w: np.asarray(w) @ a
        est = dzoa.estimate_lipschitz(f, p=2, rng=np.random.default_rng(0))
        assert est == pytest.approx(5.0, rel=0.2)
