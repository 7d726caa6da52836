import numpy as np
import pytest

from difflab import (
    DeltaDistribution,
    GaussianMixture,
    direct_posterior_mean,
    make_schedule,
    marginal_at,
    posterior_mean,
    score_function,
)

from oracles import bayes_posterior_mean_1d, fd_gradient


class TestConstruction:
    def test_weights_must_sum_to_one(self):
        with pytest.raises(ValueError):
            GaussianMixture([0.5, 0.6], [[0.0], [1.0]], [[1.0], [1.0]])

    def test_weights_positive(self):
        with pytest.raises(ValueError):
            GaussianMixture([1.2, -0.2], [[0.0], [1.0]], [[1.0], [1.0]])

    def test_variances_positive(self):
        with pytest.raises(ValueError):
            GaussianMixture([1.0], [[0.0]], [[0.0]])

    def test_nonfinite_x_rejected(self, bimodal):
        with pytest.raises(ValueError):
            bimodal.log_density(np.nan)
        with pytest.raises(ValueError):
            bimodal.score(np.inf)


class TestMarginal:
    def test_delta_marginal(self):
        sched = make_schedule("sldm", sigma_const=0.05)
        marg = marginal_at(DeltaDistribution([2.0]), sched, 0.5)
        assert marg.means[0, 0] == pytest.approx(1.0)
        assert marg.variances[0, 0] == pytest.approx(0.0025)

    def test_t_zero_broadens_by_sigma0_only(self, bimodal, any_schedule):
        marg = marginal_at(bimodal, any_schedule, 0.0)
        mu0 = any_schedule.mu(0.0)
        expected_var = mu0**2 * 0.25 + any_schedule.sigma(0.0) ** 2
        assert np.allclose(marg.means[:, 0], mu0 * np.array([2.0, -2.0]))
        assert np.allclose(marg.variances, expected_var)
        assert np.allclose(marg.weights, bimodal.weights)

    def test_bimodal_sldm_t075_closed_form(self, bimodal):
        sched = make_schedule("sldm", sigma_const=0.05)
        marg = marginal_at(bimodal, sched, 0.75)
        assert np.allclose(np.sort(marg.means[:, 0]), [-0.5, 0.5])
        assert np.allclose(marg.variances, 0.0625 * 0.25 + 0.0025)

    def test_marginal_matches_monte_carlo(self, bimodal):
        # forward-simulate x_t = mu x0 + sigma eps directly and compare moments
        sched = make_schedule("sldm", sigma_const=0.05)
        t = 0.75
        n = 1_000_000
        rng = np.random.default_rng(7)
        x0 = bimodal.sample(n, rng)
        xt = sched.mu(t) * x0 + sched.sigma(t) * rng.standard_normal((n, 1))
        marg = marginal_at(bimodal, sched, t)
        mean_se = np.sqrt(marg.variance()[0] / n)
        assert abs(xt.mean() - marg.mean()[0]) < 3 * mean_se
        var_se = marg.variance()[0] * np.sqrt(2.0 / n)
        assert abs(xt.var() - marg.variance()[0]) < 3 * var_se


class TestScore:
    def test_delta_marginal_score_closed_form(self):
        sched = make_schedule("sldm", sigma_const=0.05)
        score = score_function(DeltaDistribution([2.0]), sched)
        x = np.array([[0.3], [1.4]])
        expected = -(x - 0.5 * 2.0) / 0.05**2
        assert np.allclose(score(x, 0.5), expected, rtol=1e-12)

    def test_symmetric_mixture_score_zero_at_origin(self, bimodal):
        assert bimodal.score(0.0) == pytest.approx(0.0, abs=1e-12)

    def test_score_is_gradient_of_log_density(self, bimodal, rng):
        mixtures = [
            bimodal,
            GaussianMixture(
                [0.2, 0.5, 0.3],
                [[-1.0, 0.5], [0.3, -0.2], [2.0, 1.0]],
                [[0.5, 0.2], [1.5, 0.7], [0.05, 0.3]],
            ),
        ]
        for mix in mixtures:
            pts = rng.normal(scale=2.0, size=(100, mix.dims))
            for x in pts:
                g = fd_gradient(mix.log_density, x, h=1e-6)
                s = mix.score(x)
                assert np.max(np.abs(g - s)) / max(np.max(np.abs(s)), 1e-3) < 1e-5

    def test_tiny_variance_marginal_stable(self, bimodal):
        # schedule marginals reach variances ~2.5e-3; far tails must not
        # underflow into nan scores
        sched = make_schedule("sldm", sigma_const=0.05)
        marg = marginal_at(bimodal, sched, 0.9)
        x = np.linspace(-6, 6, 201)[:, None]
        assert np.all(np.isfinite(marg.score(x)))
        assert np.all(np.isfinite(marg.log_density(x)))


class TestPosteriorMean:
    def test_delta_posterior_is_point(self):
        sched = make_schedule("sldm", sigma_const=0.05)
        pm = posterior_mean(DeltaDistribution([2.0]), sched, 0.7, np.array([[0.1], [5.0]]))
        assert np.allclose(pm, 2.0)

    def test_symmetric_mixture_posterior_zero_at_origin(self, bimodal):
        sched = make_schedule("sldm", sigma_const=0.05)
        assert posterior_mean(bimodal, sched, 0.5, 0.0) == pytest.approx(0.0, abs=1e-12)

    def test_score_route_matches_bayes_oracle(self, bimodal):
        sched = make_schedule("sldm", sigma_const=0.05)
        x = 1.2
        got = posterior_mean(bimodal, sched, 0.5, x)
        want = bayes_posterior_mean_1d(
            bimodal.weights, bimodal.means[:, 0], bimodal.variances[:, 0],
            sched.mu(0.5), sched.sigma(0.5), x,
        )[0]
        assert got == pytest.approx(want, abs=1e-9)

    @pytest.mark.parametrize("kind", ["sldm", "ddpm_edm", "fm", "bfn"])
    def test_score_route_matches_direct_route(self, bimodal, kind, rng):
        sched = make_schedule(kind)
        for t in (0.1, 0.5, 0.9):
            marg = marginal_at(bimodal, sched, t)
            x = marg.sample(1000, rng)
            a = posterior_mean(bimodal, sched, t, x)
            b = direct_posterior_mean(bimodal, sched, t, x)
            assert np.max(np.abs(a - b)) < 1e-9

    def test_singular_time_rejected(self, bimodal):
        from difflab.schedules import SingularTimeError

        with pytest.raises(SingularTimeError):
            posterior_mean(bimodal, make_schedule("ddpm_edm"), 1.0, 0.3)


class TestSamplingHelpers:
    def test_moments(self, bimodal):
        assert bimodal.mean()[0] == pytest.approx(0.0)
        assert bimodal.variance()[0] == pytest.approx(0.25 + 4.0)

    def test_sample_moments(self, bimodal, rng):
        x = bimodal.sample(200_000, rng)
        assert x.mean() == pytest.approx(0.0, abs=3 * np.sqrt(4.25 / 200_000))

    def test_quantile_inverts_cdf(self, bimodal):
        for q in (0.025, 0.3, 0.5, 0.975):
            assert bimodal.cdf(bimodal.quantile(q)) == pytest.approx(q, abs=1e-10)

    def test_quantile_spans_modes(self, bimodal):
        assert bimodal.quantile(0.05) < -1.5
        assert bimodal.quantile(0.95) > 1.5
