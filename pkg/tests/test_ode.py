import numpy as np
import pytest

from difflab import (
    DeltaDistribution,
    make_schedule,
    marginal_at,
    posterior_mean_function,
    score_function,
)
from difflab.dynamics import (
    curvature_profile,
    fit_convergence_order,
    integrate_ode,
    make_score_rhs,
    pf_ode_rhs,
    pf_ode_rhs_expectation,
)
from difflab.schedules import SCHEDULE_KINDS


class TestRhsForms:
    @pytest.mark.parametrize("kind", SCHEDULE_KINDS)
    def test_score_form_equals_expectation_form(self, bimodal, kind, rng):
        # the two closed forms of the same ODE must agree pointwise
        sched = make_schedule(kind)
        score = score_function(bimodal, sched)
        pm = posterior_mean_function(bimodal, sched)
        for _ in range(100):
            t = float(rng.uniform(0.01, 0.99))
            x = marginal_at(bimodal, sched, t).sample(10, rng)
            a = pf_ode_rhs(sched, score, t, x)
            b = pf_ode_rhs_expectation(sched, pm, t, x)
            assert np.max(np.abs(a - b)) < 1e-9

    def test_sldm_rhs_is_minus_posterior_mean(self, bimodal, rng):
        sched = make_schedule("sldm", sigma_const=0.05)
        pm = posterior_mean_function(bimodal, sched)
        x = rng.normal(size=(20, 1))
        t = 0.4
        assert np.allclose(pf_ode_rhs_expectation(sched, pm, t, x), -pm(x, t), atol=1e-14)

    def test_sldm_delta_rhs_constant(self):
        sched = make_schedule("sldm", sigma_const=0.05)
        data = DeltaDistribution([2.0])
        score = score_function(data, sched)
        for t in (0.1, 0.5, 0.9):
            x = np.array([[sched.mu(t) * 2.0], [0.33], [-4.0]])
            rhs = pf_ode_rhs(sched, score, t, x)
            assert np.allclose(rhs, -2.0, atol=1e-10)

    def test_ve_rhs_drops_drift(self, bimodal):
        sched = make_schedule("ve", sigma_max=10.0)
        score = score_function(bimodal, sched)
        t, x = 0.3, np.array([[0.7]])
        expected = -sched.sigma(t) * sched.sigma_dot(t) * score(x, t)
        assert np.allclose(pf_ode_rhs(sched, score, t, x), expected, rtol=1e-13)


class TestIntegrate:
    def test_euler_exact_on_delta_straight_line(self):
        sched = make_schedule("sldm", sigma_const=0.05)
        score = score_function(DeltaDistribution([2.0]), sched)
        rhs = make_score_rhs(sched, score)
        t0 = 0.999
        for n_steps in (1, 2, 3, 7, 64):
            traj = integrate_ode(rhs, sched.mu(t0) * 2.0, t0, 0.0, n_steps, method="euler")
            assert abs(traj.terminal()[0] - 2.0) < 1e-12

    def test_divergence_aborts(self):
        with np.errstate(over="ignore"), pytest.raises(FloatingPointError):
            integrate_ode(lambda t, x: x * 1e4, 1.0, 0.0, 50.0, 200, method="euler")

    def test_record_shapes_and_monotonicity(self, bimodal):
        sched = make_schedule("sldm", sigma_const=0.05)
        rhs = make_score_rhs(sched, score_function(bimodal, sched))
        traj = integrate_ode(rhs, np.array([0.1, -0.2]), 0.99, 0.0, 16)
        assert traj.times.shape == (17,)
        assert traj.states.shape == (17, 2)
        assert traj.derivative_estimates.shape == (16, 2)
        assert np.all(np.diff(traj.times) < 0)

    def test_euler_observed_order_near_one(self, bimodal):
        sched = make_schedule("sldm", sigma_const=0.05)
        rhs = make_score_rhs(sched, score_function(bimodal, sched))
        t0 = 0.999
        marg = marginal_at(bimodal, sched, t0)
        x0 = np.array([marg.quantile(q) for q in (0.1, 0.3, 0.7, 0.9)])
        ref = integrate_ode(rhs, x0, t0, 0.0, 4096, method="rk4").terminal()
        steps = np.array([20, 40, 80, 160, 320])
        errs = []
        for n in steps:
            term = integrate_ode(rhs, x0, t0, 0.0, int(n), method="euler").terminal()
            errs.append(np.mean(np.abs(term - ref)))
        order = fit_convergence_order(steps, errs)
        assert 0.8 <= order <= 1.2, (order, errs)

    def test_rk4_observed_order_on_smooth_subinterval(self, bimodal):
        sched = make_schedule("sldm", sigma_const=0.05)
        rhs = make_score_rhs(sched, score_function(bimodal, sched))
        t_hi, t_lo = 0.9, 0.1
        marg = marginal_at(bimodal, sched, t_hi)
        x0 = np.array([marg.quantile(q) for q in (0.1, 0.3, 0.7, 0.9)])
        ref = integrate_ode(rhs, x0, t_hi, t_lo, 4096, method="rk4").terminal()
        steps = np.array([8, 16, 32, 64])
        errs = []
        for n in steps:
            term = integrate_ode(rhs, x0, t_hi, t_lo, int(n), method="rk4").terminal()
            errs.append(np.mean(np.abs(term - ref)))
        order = fit_convergence_order(steps, errs)
        assert order >= 3.5, (order, errs)


class TestCurvature:
    def test_linear_trajectory_zero_curvature(self):
        traj = integrate_ode(lambda t, x: np.full_like(x, -3.0), 5.0, 1.0, 0.0, 64)
        _, mags = curvature_profile(traj)
        assert np.all(mags < 1e-8)

    def test_delta_sldm_curvature_zero(self):
        sched = make_schedule("sldm", sigma_const=0.05)
        rhs = make_score_rhs(sched, score_function(DeltaDistribution([2.0]), sched))
        traj = integrate_ode(rhs, sched.mu(0.999) * 2.0, 0.999, 0.0, 128)
        _, mags = curvature_profile(traj)
        assert np.all(mags < 1e-8)

    def test_sldm_straighter_than_other_schedules(self, bimodal):
        # mean |x''| over t in [0, 0.9] on matched 512-step grids
        t0 = 1.0 - 1e-6
        quantiles = (np.arange(20) + 0.5) / 20.0
        stats = {}
        for kind in ("sldm", "ddpm_edm", "ve", "ddim", "bfn"):
            sched = make_schedule(kind, sigma_const=0.05) if kind == "sldm" else make_schedule(kind)
            rhs = make_score_rhs(sched, score_function(bimodal, sched))
            marg = marginal_at(bimodal, sched, t0)
            x0 = np.array([marg.quantile(q) for q in quantiles])
            traj = integrate_ode(rhs, x0, t0, 0.0, 512, method="rk4")
            times, mags = curvature_profile(traj)
            mask = times <= 0.9
            stats[kind] = float(np.mean(mags[mask]))
        for kind in ("ddpm_edm", "ve", "ddim", "bfn"):
            assert stats["sldm"] < stats[kind], stats


def test_fit_convergence_order_recovers_slope():
    steps = np.array([10, 20, 40, 80])
    errs = 3.0 / steps**2
    assert fit_convergence_order(steps, errs) == pytest.approx(2.0, abs=1e-12)
