import numpy as np
import pytest

from airfl_sim.analysis import (GradientStats,
                                closed_form_mse, coeff_variances,
                                convergence_bound, cross_moment_u,
                                expected_coefficients,
                                interferer_second_moment_u, mean_u,
                                second_moment_u)
from airfl_sim.channel import SystemConfig
from airfl_sim.schemes import (SCHEME_POWER_INVERSION,
                               SCHEME_WEIGHTED_FULL_POWER,
                               power_inversion_params,
                               weighted_full_power_params)

PI2 = np.pi**2


class TestRawMoments:
    def test_mean_u_values(self):
        assert mean_u([1.0], 0, 4) == pytest.approx(np.pi)
        assert mean_u([1.0, 2.0, 2.0], 0, 16) == pytest.approx(4 * np.pi / 3)

    def test_second_moment_values(self):
        assert second_moment_u([1.0], 0, 4) == pytest.approx(4 + 0.75 * PI2)

    def test_single_device_variance_identity(self):
        # E[u^2] - E[u]^2 collapses to N (16 - pi^2) / 16 when K = 1
        for N in (1, 4, 64):
            var = second_moment_u([1.0], 0, N) - mean_u([1.0], 0, N) ** 2
            assert var == pytest.approx(N * (16 - PI2) / 16)

    def test_cross_moment_values(self):
        assert cross_moment_u([1.0, 1.0], 0, 1, 2) == pytest.approx(0.5 + PI2 / 16)
        assert cross_moment_u([1.0, 3.0], 0, 1, 8) == pytest.approx(
            cross_moment_u([1.0, 3.0], 1, 0, 8))
        with pytest.raises(ValueError):
            cross_moment_u([1.0, 1.0], 1, 1, 2)

    def test_interferer_second_moment(self):
        assert interferer_second_moment_u(2) == 1.0
        assert interferer_second_moment_u(256) == 128.0


class TestCoefficientStatistics:
    def test_expected_coefficient_is_one_over_K(self):
        cfg = SystemConfig(K=5, M=2, N=32, P_max=2.0, G=1.3)
        beta = np.linspace(0.5, 3.0, 7)
        for make in (power_inversion_params, weighted_full_power_params):
            params = make(cfg, beta)
            np.testing.assert_allclose(expected_coefficients(params, beta, cfg.N),
                                       1.0 / cfg.K, rtol=1e-12)

    def test_hardening_scaling(self):
        # lambda scales with N, so variances decay exactly as 1/N
        beta = np.array([1.0, 2.0, 0.5, 1.5])
        var_by_n = {}
        for N in (64, 128, 256):
            cfg = SystemConfig(K=3, M=1, N=N)
            params = weighted_full_power_params(cfg, beta)
            vk, vm = coeff_variances(params, beta, N)
            var_by_n[N] = (vk, vm)
        for N in (128, 256):
            np.testing.assert_allclose(var_by_n[N][0] * N, var_by_n[64][0] * 64,
                                       rtol=1e-12)
            np.testing.assert_allclose(var_by_n[N][1] * N, var_by_n[64][1] * 64,
                                       rtol=1e-12)

    def test_variance_monte_carlo(self):
        from airfl_sim.harness import estimate_coefficient_moments
        cfg = SystemConfig(K=8, M=2, N=64, P_max=1.0, G=1.0)
        beta = np.linspace(1.0, 2.0, 10)
        params = weighted_full_power_params(cfg, beta)
        est = estimate_coefficient_moments(cfg, beta, SCHEME_WEIGHTED_FULL_POWER,
                                           "aligned", trials=10**5, seed=123)
        vk, vm = coeff_variances(params, beta, cfg.N)
        emp_vk = np.array([e.variance for e in est.targets])
        emp_vm = np.array([e.variance for e in est.interferers])
        np.testing.assert_allclose(emp_vk, vk, rtol=0.02)
        np.testing.assert_allclose(emp_vm, vm, rtol=0.02)


class TestGradientStats:
    def test_from_fixed_set(self):
        g = np.array([[1.0, 0.0], [0.0, 2.0]])
        s = GradientStats.from_gradients(g)
        np.testing.assert_allclose(s.self_moment, [1.0, 4.0])
        assert s.cross_moment[0, 1] == 0.0
        assert s.dim == 2
        assert s.global_power == pytest.approx(np.linalg.norm(g.mean(0)) ** 2)

    def test_cauchy_schwarz_enforced(self):
        with pytest.raises(ValueError):
            GradientStats(np.array([1.0, 1.0]),
                          np.array([[1.0, 2.0], [2.0, 1.0]]), dim=4)


class TestClosedFormMse:
    def test_interference_term_direct(self):
        # K=1, M=1, N=4, unit alphas and G: interference = 2/pi^2
        cfg = SystemConfig(K=1, M=1, N=4, P_max=1.0, G=1.0, noise_psd=1e-300)
        gstats = GradientStats(np.ones(1), np.zeros((1, 1)), dim=1)
        mse = closed_form_mse(SCHEME_POWER_INVERSION, cfg, np.ones(2), gstats)
        assert mse.interference == pytest.approx(2 / PI2)

    def test_noise_term_direct(self):
        # sigma^2 D = 1 with the same config: noise = 8 / (16 pi^2)
        cfg = SystemConfig(K=1, M=1, N=4, P_max=1.0, G=1.0,
                           noise_psd=1e-6, bandwidth=1.0)
        gstats = GradientStats(np.ones(1), np.zeros((1, 1)), dim=10**6)
        mse = closed_form_mse(SCHEME_POWER_INVERSION, cfg, np.ones(2), gstats)
        assert mse.noise == pytest.approx(8 / (16 * PI2))

    def test_no_interferers_zero_component(self):
        cfg = SystemConfig(K=3, M=0, N=16)
        gstats = GradientStats(np.ones(3), np.zeros((3, 3)), dim=8)
        for scheme in (SCHEME_POWER_INVERSION, SCHEME_WEIGHTED_FULL_POWER):
            mse = closed_form_mse(scheme, cfg, np.ones(3), gstats)
            assert mse.interference == 0.0
            assert mse.total == pytest.approx(mse.computation + mse.noise)

    def test_component_scaling_in_N(self):
        beta = np.linspace(0.8, 1.6, 6)
        gstats = GradientStats(np.full(4, 1.2), np.full((4, 4), 0.3), dim=50)
        ref = None
        for N in (64, 256, 1024):
            cfg = SystemConfig(K=4, M=2, N=N)
            mse = closed_form_mse(SCHEME_WEIGHTED_FULL_POWER, cfg, beta, gstats)
            scaled = (N * (mse.computation + mse.interference), N**2 * mse.noise)
            if ref is None:
                ref = scaled
            else:
                assert scaled[0] == pytest.approx(ref[0])
                assert scaled[1] == pytest.approx(ref[1])

    def test_power_growth_hits_computation_floor(self):
        # scaling all transmit powers jointly leaves computation fixed and
        # drives noise to zero; total decreases monotonically to the floor
        beta = np.linspace(0.5, 1.5, 8)
        gstats = GradientStats(np.ones(5), np.zeros((5, 5)), dim=30)
        totals, comps = [], []
        for p_dbm in (-10, 0, 10, 20, 30, 60):
            cfg = SystemConfig(K=5, M=3, N=128, P_max=1e-3 * 10**(p_dbm / 10))
            mse = closed_form_mse(SCHEME_POWER_INVERSION, cfg, beta, gstats)
            totals.append(mse.total)
            comps.append(mse.computation)
        assert np.all(np.diff(totals) < 0)
        assert np.ptp(comps) == pytest.approx(0.0, abs=1e-15)
        assert totals[-1] == pytest.approx(comps[-1] + mse.interference, rel=1e-6)

    def test_unknown_scheme_rejected(self):
        cfg = SystemConfig(K=1, M=0, N=4)
        gstats = GradientStats(np.ones(1), np.zeros((1, 1)), dim=1)
        with pytest.raises(ValueError):
            closed_form_mse("bev", cfg, np.ones(1), gstats)


class TestOrderings:
    def rand_setup(self, gen, M=4):
        K = int(gen.integers(2, 12))
        beta = gen.uniform(0.2, 5.0, K + M)
        cfg = SystemConfig(K=K, M=M, N=int(gen.integers(8, 512)))
        return cfg, beta

    def test_interference_and_noise_ordering(self):
        # full-power scheme suppresses interference and noise at least as well
        gen = np.random.default_rng(7)
        for _ in range(300):
            cfg, beta = self.rand_setup(gen)
            gstats = GradientStats(np.ones(cfg.K), np.zeros((cfg.K, cfg.K)), dim=10)
            a = closed_form_mse(SCHEME_POWER_INVERSION, cfg, beta, gstats)
            b = closed_form_mse(SCHEME_WEIGHTED_FULL_POWER, cfg, beta, gstats)
            assert b.interference <= a.interference * (1 + 1e-12)
            assert b.noise <= a.noise * (1 + 1e-12)

    def test_iid_computation_ordering(self):
        # equal self moments and nonnegative cross moments: power inversion
        # computes at least as accurately
        gen = np.random.default_rng(8)
        for _ in range(300):
            cfg, beta = self.rand_setup(gen, M=0)
            cross = float(gen.uniform(0, 1.0))
            gstats = GradientStats(np.full(cfg.K, 1.0),
                                   np.full((cfg.K, cfg.K), cross), dim=10)
            a = closed_form_mse(SCHEME_POWER_INVERSION, cfg, beta, gstats)
            b = closed_form_mse(SCHEME_WEIGHTED_FULL_POWER, cfg, beta, gstats)
            assert a.computation <= b.computation * (1 + 1e-12)

    def test_varpi_ordering(self):
        gen = np.random.default_rng(9)
        for _ in range(300):
            cfg, beta = self.rand_setup(gen)
            a = convergence_bound(SCHEME_POWER_INVERSION, cfg, beta, L=2.0,
                                  xi=1.5, chi2=0.3, T=100, f_gap=1.0, dim=10)
            b = convergence_bound(SCHEME_WEIGHTED_FULL_POWER, cfg, beta, L=2.0,
                                  xi=1.5, chi2=0.3, T=100, f_gap=1.0, dim=10)
            assert a.varpi <= b.varpi * (1 + 1e-12)


class TestConvergenceBound:
    def test_direct_value(self):
        cfg = SystemConfig(K=1, M=0, N=16)
        cb = convergence_bound(SCHEME_POWER_INVERSION, cfg, np.ones(1), L=1.0,
                               xi=1.0, chi2=1.0, T=100, f_gap=1.0, dim=1)
        assert cb.varpi == pytest.approx((16 - PI2) / (16 * PI2) + 1)

    def test_large_N_limits(self):
        cfg = SystemConfig(K=4, M=2, N=10**9, noise_psd=1e-17)
        beta = np.linspace(0.5, 2.0, 6)
        L, chi2 = 2.5, 0.7
        for scheme in (SCHEME_POWER_INVERSION, SCHEME_WEIGHTED_FULL_POWER):
            cb = convergence_bound(scheme, cfg, beta, L=L, xi=1.2, chi2=chi2,
                                   T=10, f_gap=1.0, dim=100)
            assert cb.varpi == pytest.approx(L, rel=1e-6)
            assert cb.epsilon_bias == pytest.approx(L * chi2 / cfg.K, rel=1e-6)

    def test_bound_decreases_in_T(self):
        cfg = SystemConfig(K=3, M=1, N=64)
        beta = np.ones(4)
        vals = [convergence_bound(SCHEME_POWER_INVERSION, cfg, beta, 1.0, 1.0,
                                  1.0, T, 1.0, dim=10).bound_at_T
                for T in (10, 100, 1000, 10000)]
        assert np.all(np.diff(vals) < 0)

    def test_varpi_at_least_L(self):
        cfg = SystemConfig(K=2, M=0, N=4)
        cb = convergence_bound(SCHEME_WEIGHTED_FULL_POWER, cfg,
                               np.array([1.0, 3.0]), L=1.5, xi=2.0, chi2=1.0,
                               T=10, f_gap=1.0, dim=5)
        assert cb.varpi >= 1.5

    def test_rejects_nonpositive(self):
        cfg = SystemConfig(K=1, M=0, N=4)
        with pytest.raises(ValueError):
            convergence_bound(SCHEME_POWER_INVERSION, cfg, np.ones(1), 0.0,
                              1.0, 1.0, 10, 1.0, dim=1)
