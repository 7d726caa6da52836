"""Noise schedules for the unified Gaussian corruption process.

Every schedule defines the marginal

    x_t = mu(t) * x_0 + sigma(t) * eps,    eps ~ N(0, I),  t in [0, 1],

with t=0 the data end and t=1 the prior end.  The induced linear SDE is

    dx = f(t) x dt + g(t) dW,
    f(t)   = mu_dot(t) / mu(t),
    g(t)^2 = 2 sigma(t) sigma_dot(t) - 2 sigma(t)^2 mu_dot(t) / mu(t),

valid wherever mu(t) > 0.  Six closed-form families are provided:

    kind        mu(t)                  sigma(t)
    --------    -------------------    ---------------------------
    sldm        1 - t                  sigma_const
    ddpm_edm    1 - t^2                t * sqrt(2 - t^2)
    ve          1                      sqrt(t) * sigma_max
    ddim        1                      t * sigma_max
    fm          1 - t                  sigma_min + t (1 - sigma_min)
    bfn         1 - q(t)               sqrt(q(t) (1 - q(t))),  q(t) = sigma_min^(2(1-t))

Constraints: mu non-negative and non-increasing, sigma non-negative,
sigma/mu non-decreasing, g^2 >= 0.  Boundary conditions mu(0)=1 and
sigma(0)=0 hold exactly or up to the schedule's own small constant
(sigma_min for fm/bfn); the straight-line schedule deliberately keeps
sigma(0) = sigma_const > 0.
"""

from __future__ import annotations

import abc
import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "Schedule",
    "StraightLineSchedule",
    "VPSchedule",
    "VESchedule",
    "DDIMSchedule",
    "FlowMatchingSchedule",
    "BayesianFlowSchedule",
    "make_schedule",
    "ScheduleDomainError",
    "SingularTimeError",
    "ConstraintCheck",
    "ConstraintReport",
    "SCHEDULE_KINDS",
    "SINGULAR_EDGE",
]

SCHEDULE_KINDS = ("sldm", "ddpm_edm", "ve", "ddim", "fm", "bfn")

# Coefficient queries stop this far short of t=1 for schedules with mu(1)=0;
# the final sampling step is always skipped anyway.
SINGULAR_EDGE = 1e-6


class ScheduleDomainError(ValueError):
    """Raised when t falls outside the schedule's time domain."""


class SingularTimeError(ValueError):
    """Raised when a quantity is evaluated at a singular point (e.g. mu(t)=0)."""


def _as_time(t):
    """Validate t in [0, 1]; returns (ndarray, was_scalar)."""
    arr = np.asarray(t, dtype=np.float64)
    if not np.all(np.isfinite(arr)):
        raise ScheduleDomainError("t must be finite")
    if np.any(arr < 0.0) or np.any(arr > 1.0):
        raise ScheduleDomainError(f"t={t} outside [0, 1]")
    return arr, arr.ndim == 0


def _ret(values, scalar):
    values = np.asarray(values, dtype=np.float64)
    return float(values) if scalar else values


class Schedule(abc.ABC):
    """Base class: closed-form mu/sigma plus SDE/ODE coefficients."""

    kind: str = ""
    #: mu(1) == 0, so drift/diffusion queries are restricted to t <= 1 - SINGULAR_EDGE.
    singular_at_one: bool = False

    @abc.abstractmethod
    def _mu(self, t: np.ndarray) -> np.ndarray: ...

    @abc.abstractmethod
    def _sigma(self, t: np.ndarray) -> np.ndarray: ...

    @abc.abstractmethod
    def _mu_dot(self, t: np.ndarray) -> np.ndarray: ...

    @abc.abstractmethod
    def _sigma_dot(self, t: np.ndarray) -> np.ndarray: ...

    def _sigma_sigma_dot(self, t: np.ndarray) -> np.ndarray:
        # Product sigma * sigma_dot; overridden where the factors are
        # individually singular but the product is regular.
        return self._sigma(t) * self._sigma_dot(t)

    # -- public, domain-checked API ------------------------------------

    def mu(self, t):
        t, scalar = _as_time(t)
        return _ret(self._mu(t), scalar)

    def sigma(self, t):
        t, scalar = _as_time(t)
        return _ret(self._sigma(t), scalar)

    def mu_dot(self, t):
        t, scalar = _as_time(t)
        return _ret(self._mu_dot(t), scalar)

    def sigma_dot(self, t):
        t, scalar = _as_time(t)
        return _ret(self._sigma_dot(t), scalar)

    def _check_nonsingular(self, t: np.ndarray, what: str) -> None:
        if self.singular_at_one and np.any(t > 1.0 - SINGULAR_EDGE):
            raise SingularTimeError(
                f"{self.kind}: {what} undefined for t > {1.0 - SINGULAR_EDGE} (mu(1) = 0)"
            )

    def drift_coeff(self, t):
        """f(t) = mu_dot / mu of the forward SDE."""
        t, scalar = _as_time(t)
        self._check_nonsingular(t, "drift_coeff")
        mu = self._mu(t)
        if np.any(mu <= 0.0):
            raise SingularTimeError(f"{self.kind}: mu(t) = 0 at t={t}")
        return _ret(self._mu_dot(t) / mu, scalar)

    def diffusion_coeff_sq(self, t):
        """g(t)^2 = 2 sigma sigma_dot - 2 sigma^2 mu_dot / mu, clamped at 0."""
        t, scalar = _as_time(t)
        self._check_nonsingular(t, "diffusion_coeff_sq")
        mu = self._mu(t)
        if np.any(mu <= 0.0):
            raise SingularTimeError(f"{self.kind}: mu(t) = 0 at t={t}")
        g2 = 2.0 * self._sigma_sigma_dot(t) - 2.0 * self._sigma(t) ** 2 * self._mu_dot(t) / mu
        if np.any(g2 < -1e-12):
            raise SingularTimeError(f"{self.kind}: g^2 < 0 at t={t}")
        return _ret(np.maximum(g2, 0.0), scalar)

    def snr(self, t):
        """(mu/sigma)^2; rejects sigma(t)=0 where the ratio is undefined."""
        t, scalar = _as_time(t)
        sig = self._sigma(t)
        if np.any(sig == 0.0):
            raise SingularTimeError(f"{self.kind}: sigma(t) = 0 at t={t}; snr infinite")
        return _ret((self._mu(t) / sig) ** 2, scalar)

    def validate(self, grid_size: int = 1000) -> "ConstraintReport":
        return validate_schedule(self, grid_size)

    def __repr__(self):
        return f"{type(self).__name__}({self._param_repr()})"

    def _param_repr(self) -> str:
        return ""


class StraightLineSchedule(Schedule):
    """mu = 1 - t with a constant noise level; trajectories of the induced
    probability-flow ODE are exactly straight for point-mass data."""

    kind = "sldm"
    singular_at_one = True

    def __init__(self, sigma_const: float = 0.05):
        if sigma_const < 0:
            raise ValueError("sigma_const must be >= 0")
        self.sigma_const = float(sigma_const)

    def _mu(self, t):
        return 1.0 - t

    def _sigma(self, t):
        return np.full_like(t, self.sigma_const)

    def _mu_dot(self, t):
        return np.full_like(t, -1.0)

    def _sigma_dot(self, t):
        return np.zeros_like(t)

    def _sigma_sigma_dot(self, t):
        return np.zeros_like(t)

    def _param_repr(self):
        return f"sigma_const={self.sigma_const}"


class VPSchedule(Schedule):
    """Variance-preserving schedule mu = 1 - t^2, the polynomial stand-in for
    the cosine schedule; satisfies mu^2 + sigma^2 = 1."""

    kind = "ddpm_edm"
    singular_at_one = True

    def _mu(self, t):
        return 1.0 - t * t

    def _sigma(self, t):
        # sqrt(1 - (1-t^2)^2) written as t*sqrt(2-t^2) to stay accurate near 0
        return t * np.sqrt(2.0 - t * t)

    def _mu_dot(self, t):
        return -2.0 * t

    def _sigma_dot(self, t):
        return 2.0 * (1.0 - t * t) / np.sqrt(2.0 - t * t)

    def _sigma_sigma_dot(self, t):
        return 2.0 * t * (1.0 - t * t)


class VESchedule(Schedule):
    """Variance-exploding schedule: mu = 1, sigma = sqrt(t) * sigma_max."""

    kind = "ve"

    def __init__(self, sigma_max: float = 10.0):
        if sigma_max <= 0:
            raise ValueError("sigma_max must be > 0")
        self.sigma_max = float(sigma_max)

    def _mu(self, t):
        return np.ones_like(t)

    def _sigma(self, t):
        return np.sqrt(t) * self.sigma_max

    def _mu_dot(self, t):
        return np.zeros_like(t)

    def _sigma_dot(self, t):
        if np.any(t == 0.0):
            raise SingularTimeError("ve: sigma_dot = sigma_max/(2 sqrt(t)) undefined at t=0")
        return self.sigma_max / (2.0 * np.sqrt(t))

    def _sigma_sigma_dot(self, t):
        # sigma * sigma_dot = sigma_max^2 / 2 everywhere, including t=0
        return np.full_like(t, 0.5 * self.sigma_max**2)

    def _param_repr(self):
        return f"sigma_max={self.sigma_max}"


class DDIMSchedule(Schedule):
    """mu = 1, sigma = t * sigma_max (linear-noise reparameterization)."""

    kind = "ddim"

    def __init__(self, sigma_max: float = 10.0):
        if sigma_max <= 0:
            raise ValueError("sigma_max must be > 0")
        self.sigma_max = float(sigma_max)

    def _mu(self, t):
        return np.ones_like(t)

    def _sigma(self, t):
        return t * self.sigma_max

    def _mu_dot(self, t):
        return np.zeros_like(t)

    def _sigma_dot(self, t):
        return np.full_like(t, self.sigma_max)

    def _param_repr(self):
        return f"sigma_max={self.sigma_max}"


class FlowMatchingSchedule(Schedule):
    """Linear interpolation to a unit Gaussian: mu = 1-t,
    sigma = sigma_min + t (1 - sigma_min)."""

    kind = "fm"
    singular_at_one = True

    def __init__(self, sigma_min: float = 1e-3):
        if sigma_min <= 0:
            raise ValueError("sigma_min must be > 0")
        self.sigma_min = float(sigma_min)

    def _mu(self, t):
        return 1.0 - t

    def _sigma(self, t):
        return self.sigma_min + t * (1.0 - self.sigma_min)

    def _mu_dot(self, t):
        return np.full_like(t, -1.0)

    def _sigma_dot(self, t):
        return np.full_like(t, 1.0 - self.sigma_min)

    def _param_repr(self):
        return f"sigma_min={self.sigma_min}"


class BayesianFlowSchedule(Schedule):
    """Bayesian-flow schedule for continuous data.

    With q(t) = sigma_min^(2(1-t)):  mu = 1 - q,  sigma^2 = q (1 - q).
    mu decays from 1 - sigma_min^2 at the data end to 0 at t=1; sigma_dot is
    singular at t=1 (where sigma returns to 0) but sigma*sigma_dot is regular.
    """

    kind = "bfn"
    singular_at_one = True

    def __init__(self, sigma_min: float = 1e-3):
        if not 0 < sigma_min < 1:
            raise ValueError("sigma_min must be in (0, 1)")
        self.sigma_min = float(sigma_min)
        self._log_q_rate = -2.0 * math.log(sigma_min)  # q_dot = rate * q > 0

    def _q(self, t):
        return np.exp(-self._log_q_rate * (1.0 - t))

    def _mu(self, t):
        return 1.0 - self._q(t)

    def _sigma(self, t):
        q = self._q(t)
        return np.sqrt(q * (1.0 - q))

    def _mu_dot(self, t):
        return -self._log_q_rate * self._q(t)

    def _sigma_dot(self, t):
        q = self._q(t)
        var = q * (1.0 - q)
        if np.any(var == 0.0):
            raise SingularTimeError("bfn: sigma_dot undefined at t=1 (sigma = 0)")
        return (1.0 - 2.0 * q) * self._log_q_rate * q / (2.0 * np.sqrt(var))

    def _sigma_sigma_dot(self, t):
        q = self._q(t)
        return 0.5 * (1.0 - 2.0 * q) * self._log_q_rate * q

    def _param_repr(self):
        return f"sigma_min={self.sigma_min}"


_KIND_TO_CLS = {
    "sldm": StraightLineSchedule,
    "ddpm_edm": VPSchedule,
    "ve": VESchedule,
    "ddim": DDIMSchedule,
    "fm": FlowMatchingSchedule,
    "bfn": BayesianFlowSchedule,
}


def make_schedule(kind: str, **params) -> Schedule:
    """Construct a schedule by kind name ('sldm', 'ddpm_edm', 've', 'ddim',
    'fm', 'bfn'); unknown parameter names raise TypeError."""
    key = kind.lower()
    if key not in _KIND_TO_CLS:
        raise ValueError(f"unknown schedule kind {kind!r}; expected one of {SCHEDULE_KINDS}")
    return _KIND_TO_CLS[key](**params)


# ---------------------------------------------------------------------------
# constraint validation
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ConstraintCheck:
    name: str
    status: str  # "pass" | "fail" | "waived"
    first_violation_t: float | None = None
    detail: str = ""


@dataclass(frozen=True)
class ConstraintReport:
    kind: str
    checks: tuple[ConstraintCheck, ...] = field(default_factory=tuple)

    @property
    def ok(self) -> bool:
        return all(c.status != "fail" for c in self.checks)

    def __str__(self):
        lines = [f"schedule {self.kind}:"]
        for c in self.checks:
            where = "" if c.first_violation_t is None else f" (first at t={c.first_violation_t:.6g})"
            note = f" -- {c.detail}" if c.detail else ""
            lines.append(f"  [{c.status:>6}] {c.name}{where}{note}")
        return "\n".join(lines)


def _first_bad(grid: np.ndarray, bad: np.ndarray) -> float | None:
    idx = np.flatnonzero(bad)
    return float(grid[idx[0]]) if idx.size else None


def validate_schedule(schedule: Schedule, grid_size: int = 1000) -> ConstraintReport:
    """Check the constraints on a uniform interior grid.

    Boundary conditions are checked against the schedule's designed boundary
    constants: fm/bfn satisfy mu(0)=1 and sigma(0)=0 only up to sigma_min,
    and sldm's sigma(0) = sigma_const is reported as a waived, documented
    relaxation rather than a failure.
    """
    hi = 1.0 - SINGULAR_EDGE if schedule.singular_at_one else 1.0
    grid = np.linspace(0.0, hi, grid_size)
    mu = schedule.mu(grid)
    sigma = schedule.sigma(grid)
    checks: list[ConstraintCheck] = []

    mu_tol = 2.0 * getattr(schedule, "sigma_min", 0.0) ** 2 + 1e-12
    mu0 = schedule.mu(0.0)
    checks.append(
        ConstraintCheck(
            "mu(0) = 1",
            "pass" if abs(mu0 - 1.0) <= mu_tol else "fail",
            None if abs(mu0 - 1.0) <= mu_tol else 0.0,
            f"mu(0) = {mu0!r}",
        )
    )

    sig0 = schedule.sigma(0.0)
    sig_tol = 2.0 * getattr(schedule, "sigma_min", 0.0) + 1e-12
    if schedule.kind == "sldm" and sig0 > 0:
        checks.append(
            ConstraintCheck(
                "sigma(0) = 0",
                "waived",
                None,
                f"sigma(0) = {sig0} by design: constant noise keeps denoising non-trivial",
            )
        )
    else:
        ok = sig0 <= sig_tol
        checks.append(
            ConstraintCheck("sigma(0) = 0", "pass" if ok else "fail", None if ok else 0.0,
                            f"sigma(0) = {sig0!r}")
        )

    bad = mu < 0
    checks.append(ConstraintCheck("mu >= 0", "fail" if bad.any() else "pass", _first_bad(grid, bad)))

    dmu = np.diff(mu)
    bad = dmu > 1e-12
    checks.append(
        ConstraintCheck("mu non-increasing", "fail" if bad.any() else "pass",
                        _first_bad(grid[1:], bad))
    )

    bad = sigma < 0
    checks.append(ConstraintCheck("sigma >= 0", "fail" if bad.any() else "pass", _first_bad(grid, bad)))

    with np.errstate(divide="ignore"):
        ratio = np.where(mu > 0, sigma / np.maximum(mu, 1e-300), np.inf)
    bad = np.diff(ratio) < -1e-12
    checks.append(
        ConstraintCheck("sigma/mu non-decreasing", "fail" if bad.any() else "pass",
                        _first_bad(grid[1:], bad))
    )

    interior = grid[(grid > 0) & (grid <= hi)]
    g2 = schedule.diffusion_coeff_sq(interior) if interior.size else np.zeros(0)
    bad = g2 < 0  # diffusion_coeff_sq already clamps the -1e-12 tolerance band
    checks.append(
        ConstraintCheck("g^2 >= 0", "fail" if bad.any() else "pass", _first_bad(interior, bad))
    )

    pos = sigma > 0
    snr = np.where(pos, (mu / np.where(pos, sigma, 1.0)) ** 2, np.inf)
    bad = np.diff(snr) > 1e-12 * np.maximum(snr[:-1], 1.0)
    checks.append(
        ConstraintCheck("snr non-increasing", "fail" if bad.any() else "pass",
                        _first_bad(grid[1:], bad))
    )

    return ConstraintReport(schedule.kind, tuple(checks))
