"""Probability-flow ODE: right-hand sides, fixed-step integrators, curvature.

The ODE sharing the forward SDE's marginals is

    dx/dt = f(t) x - (g(t)^2 / 2) * score_t(x),

and an algebraically equivalent form in terms of the posterior mean
E[x_0 | x_t]:

    dx/dt = mu_dot(t) E[x_0|x_t] + (sigma_dot(t)/sigma(t)) (x - mu(t) E[x_0|x_t]).

Sampling integrates backward in time (t_start > t_end).  Truncation-error
studies use Euler against an RK4 reference two orders finer than any grid
under study.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from ..schedules import Schedule, SingularTimeError

__all__ = [
    "pf_ode_rhs",
    "pf_ode_rhs_expectation",
    "make_score_rhs",
    "make_expectation_rhs",
    "TrajectoryRecord",
    "integrate_ode",
    "curvature_profile",
    "fit_convergence_order",
]


def pf_ode_rhs(schedule: Schedule, score_fn, t: float, x):
    """Score form of the probability-flow ODE right-hand side."""
    f = schedule.drift_coeff(t)
    half_g2 = 0.5 * schedule.diffusion_coeff_sq(t)
    return f * np.asarray(x, dtype=np.float64) - half_g2 * np.asarray(score_fn(x, t))


def pf_ode_rhs_expectation(schedule: Schedule, posterior_mean_fn, t: float, x):
    """Posterior-mean form of the same right-hand side; sigma(t) must be > 0."""
    sigma = schedule.sigma(t)
    if sigma <= 0.0:
        raise SingularTimeError(f"{schedule.kind}: expectation form needs sigma(t) > 0 (t={t})")
    x = np.asarray(x, dtype=np.float64)
    pm = np.asarray(posterior_mean_fn(x, t))
    return schedule.mu_dot(t) * pm + (schedule.sigma_dot(t) / sigma) * (x - schedule.mu(t) * pm)


def make_score_rhs(schedule: Schedule, score_fn) -> Callable:
    def rhs(t, x):
        return pf_ode_rhs(schedule, score_fn, t, x)

    return rhs


def make_expectation_rhs(schedule: Schedule, posterior_mean_fn) -> Callable:
    def rhs(t, x):
        return pf_ode_rhs_expectation(schedule, posterior_mean_fn, t, x)

    return rhs


@dataclass(frozen=True)
class TrajectoryRecord:
    """Fixed-grid ODE trajectory; times run in integration order (descending
    for backward sampling runs)."""

    times: np.ndarray            # (m,)
    states: np.ndarray           # (m, d)
    derivative_estimates: Optional[np.ndarray] = None  # (m-1, d), rhs at left nodes

    def __post_init__(self):
        dt = np.diff(self.times)
        if not (np.all(dt > 0) or np.all(dt < 0)):
            raise ValueError("times must be strictly monotone")
        if not np.all(np.isfinite(self.states)):
            raise ValueError("states must be finite")

    @property
    def dims(self) -> int:
        return self.states.shape[1]

    def terminal(self) -> np.ndarray:
        return self.states[-1]


def _rk4_step(rhs, t, x, h):
    k1 = np.asarray(rhs(t, x))
    k2 = np.asarray(rhs(t + 0.5 * h, x + 0.5 * h * k1))
    k3 = np.asarray(rhs(t + 0.5 * h, x + 0.5 * h * k2))
    k4 = np.asarray(rhs(t + h, x + h * k3))
    return x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4), k1


def integrate_ode(rhs, x_start, t_start: float, t_end: float, n_steps: int,
                  method: str = "rk4") -> TrajectoryRecord:
    """Fixed-step integration of dx/dt = rhs(t, x) from t_start to t_end.

    x_start may be a scalar, a vector, or a batch of states (n, d); the batch
    is advanced jointly (each row is an independent trajectory when rhs acts
    elementwise).  Aborts with a diagnostic if any state goes non-finite.
    """
    if n_steps < 1:
        raise ValueError("n_steps must be >= 1")
    if method not in ("euler", "rk4"):
        raise ValueError(f"unknown method {method!r}")
    x = np.atleast_1d(np.asarray(x_start, dtype=np.float64)).copy()
    squeeze = np.asarray(x_start).ndim == 0
    times = np.linspace(t_start, t_end, n_steps + 1)
    states = np.empty((n_steps + 1,) + x.shape)
    derivs = np.empty((n_steps,) + x.shape)
    states[0] = x
    for k in range(n_steps):
        h = times[k + 1] - times[k]
        if method == "euler":
            d = np.asarray(rhs(times[k], x))
            x = x + h * d
        else:
            x, d = _rk4_step(rhs, times[k], x, h)
        if not np.all(np.isfinite(x)):
            raise FloatingPointError(
                f"integration diverged at step {k + 1}/{n_steps}, t={times[k + 1]:.6g}"
            )
        derivs[k] = d
        states[k + 1] = x
    if squeeze:
        states = states.reshape(n_steps + 1, 1)
        derivs = derivs.reshape(n_steps, 1)
    if states.ndim == 1:
        states = states[:, None]
        derivs = derivs[:, None]
    return TrajectoryRecord(times, states, derivs)


def curvature_profile(trajectory: TrajectoryRecord) -> tuple[np.ndarray, np.ndarray]:
    """Central second-difference |d^2x/dt^2| at interior grid times.

    Returns (interior_times, magnitudes); endpoints are omitted.  For batched
    trajectories the magnitude is per trajectory, shape (m-2, n_traj).
    """
    t = trajectory.times
    h = np.diff(t)
    if not np.allclose(h, h[0], rtol=1e-9, atol=1e-15):
        raise ValueError("curvature_profile requires a uniform time grid")
    x = trajectory.states
    second = (x[2:] - 2.0 * x[1:-1] + x[:-2]) / h[0] ** 2
    return t[1:-1], np.abs(second)


def fit_convergence_order(step_counts, errors) -> float:
    """Least-squares slope of log(error) against log(1/steps)."""
    n = np.asarray(step_counts, dtype=np.float64)
    e = np.asarray(errors, dtype=np.float64)
    if np.any(e <= 0):
        raise ValueError("errors must be positive for a log-log fit")
    slope = np.polyfit(np.log(n), np.log(e), 1)[0]
    return float(-slope)
