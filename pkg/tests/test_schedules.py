import math

import numpy as np
import pytest

from difflab import make_schedule
from difflab.schedules import (
    SCHEDULE_KINDS,
    SINGULAR_EDGE,
    ScheduleDomainError,
    SingularTimeError,
    validate_schedule,
)

from oracles import fd_relative_error


class TestClosedForms:
    def test_sldm_mu_linear(self):
        assert make_schedule("sldm").mu(0.5) == 0.5

    def test_ddpm_edm_endpoint(self):
        s = make_schedule("ddpm_edm")
        assert s.mu(1.0) == 0.0
        assert s.sigma(1.0) == pytest.approx(1.0, abs=1e-15)

    def test_bfn_mu_near_one_at_data_end(self):
        # mu(0) = 1 - sigma_min^2: the data-end boundary is met up to the
        # schedule's own small constant
        s = make_schedule("bfn", sigma_min=0.001)
        assert s.mu(0.0) == pytest.approx(1.0 - 1e-6, rel=1e-12)
        assert s.mu(1.0) == 0.0

    def test_sldm_sigma_constant(self):
        s = make_schedule("sldm", sigma_const=0.05)
        for t in (0.0, 0.3, 1.0):
            assert s.sigma(t) == 0.05

    def test_fm_sigma_at_zero(self):
        assert make_schedule("fm", sigma_min=0.001).sigma(0.0) == pytest.approx(0.001)

    def test_ve_sigma(self):
        assert make_schedule("ve", sigma_max=10.0).sigma(0.25) == pytest.approx(5.0)

    def test_sldm_derivatives_exact(self):
        s = make_schedule("sldm")
        t = np.linspace(0, 1, 11)
        assert np.all(s.mu_dot(t) == -1.0)
        assert np.all(s.sigma_dot(t) == 0.0)

    def test_ddpm_mu_dot_midpoint(self):
        assert make_schedule("ddpm_edm").mu_dot(0.5) == pytest.approx(-1.0)

    def test_fm_sigma_dot_constant(self):
        s = make_schedule("fm", sigma_min=0.001)
        assert s.sigma_dot(0.37) == pytest.approx(1.0 - 0.001)

    def test_sldm_coefficients_midpoint(self):
        s = make_schedule("sldm", sigma_const=0.05)
        assert s.drift_coeff(0.5) == pytest.approx(-2.0)
        assert s.diffusion_coeff_sq(0.5) == pytest.approx(2.0 * 0.0025 / 0.5)

    def test_ve_zero_drift(self):
        s = make_schedule("ve")
        assert np.all(s.drift_coeff(np.linspace(0, 1, 7)) == 0.0)

    def test_ddim_diffusion(self):
        assert make_schedule("ddim", sigma_max=10.0).diffusion_coeff_sq(0.3) == pytest.approx(60.0)

    def test_snr_values(self):
        s = make_schedule("sldm", sigma_const=0.05)
        assert s.snr(0.5) == pytest.approx(100.0)
        assert s.snr(0.0) == pytest.approx(400.0)
        assert make_schedule("ve", sigma_max=10.0).snr(1.0) == pytest.approx(0.01)


class TestDerivativeConsistency:
    """Analytic mu_dot/sigma_dot against central finite differences."""

    GRID = np.linspace(1e-3, 1.0 - 1e-3, 1000)

    @pytest.mark.parametrize("kind", SCHEDULE_KINDS)
    def test_mu_dot_matches_fd(self, kind):
        s = make_schedule(kind)
        worst = max(fd_relative_error(s.mu, s.mu_dot(t), t) for t in self.GRID)
        assert worst < 1e-6

    @pytest.mark.parametrize("kind", SCHEDULE_KINDS)
    def test_sigma_dot_matches_fd(self, kind):
        s = make_schedule(kind)
        worst = max(fd_relative_error(s.sigma, s.sigma_dot(t), t) for t in self.GRID)
        assert worst < 1e-6


class TestGridProperties:
    @pytest.mark.parametrize("kind", SCHEDULE_KINDS)
    def test_diffusion_nonnegative(self, kind):
        s = make_schedule(kind)
        hi = 1.0 - SINGULAR_EDGE if s.singular_at_one else 1.0
        t = np.linspace(1e-4, hi, 1000)
        assert np.all(s.diffusion_coeff_sq(t) >= 0.0)

    @pytest.mark.parametrize("kind", SCHEDULE_KINDS)
    def test_snr_non_increasing(self, kind):
        s = make_schedule(kind)
        t = np.linspace(1e-4, 1.0 - 1e-4, 1000)
        snr = s.snr(t)
        assert np.all(np.diff(snr) <= 1e-12 * np.maximum(snr[:-1], 1.0))

    @pytest.mark.parametrize("kind", SCHEDULE_KINDS)
    def test_validate_passes(self, kind):
        report = validate_schedule(make_schedule(kind), 1000)
        assert report.ok, str(report)

    def test_sldm_sigma0_reported_waived(self):
        report = validate_schedule(make_schedule("sldm"), 100)
        by_name = {c.name: c for c in report.checks}
        assert by_name["sigma(0) = 0"].status == "waived"


class TestErrors:
    def test_out_of_range_rejected(self, any_schedule):
        with pytest.raises(ScheduleDomainError):
            any_schedule.mu(-0.1)
        with pytest.raises(ScheduleDomainError):
            any_schedule.sigma(1.5)
        with pytest.raises(ScheduleDomainError):
            any_schedule.mu(np.array([0.2, 1.2]))

    def test_singular_endpoint_signalled(self):
        for kind in ("sldm", "ddpm_edm", "fm", "bfn"):
            s = make_schedule(kind)
            with pytest.raises(SingularTimeError):
                s.drift_coeff(1.0)
            with pytest.raises(SingularTimeError):
                s.diffusion_coeff_sq(1.0 - SINGULAR_EDGE / 10)

    def test_ve_sigma_dot_singular_at_zero(self):
        with pytest.raises(SingularTimeError):
            make_schedule("ve").sigma_dot(0.0)

    def test_bfn_sigma_dot_singular_at_one(self):
        with pytest.raises(SingularTimeError):
            make_schedule("bfn").sigma_dot(1.0)

    def test_snr_rejects_zero_sigma(self):
        with pytest.raises(SingularTimeError):
            make_schedule("ddpm_edm").snr(0.0)
        with pytest.raises(SingularTimeError):
            make_schedule("ve").snr(0.0)
        with pytest.raises(SingularTimeError):
            make_schedule("bfn").snr(1.0)

    def test_unknown_kind(self):
        with pytest.raises(ValueError):
            make_schedule("cosine")


class TestVectorized:
    def test_scalar_and_array_agree(self, any_schedule):
        t = np.array([0.1, 0.4, 0.8])
        arr = any_schedule.mu(t)
        assert arr.shape == (3,)
        assert arr[1] == any_schedule.mu(0.4)
        assert isinstance(any_schedule.mu(0.4), float)

    def test_variance_preserving_identity(self):
        s = make_schedule("ddpm_edm")
        t = np.linspace(0, 1, 101)
        assert np.allclose(s.mu(t) ** 2 + s.sigma(t) ** 2, 1.0, atol=1e-14)
