"""Euler-Maruyama simulation of the forward noising SDE.

The linear SDE dx = f(t) x dt + g(t) dW transports the t_start marginal of
the closed-form process forward, so paths are initialised at
mu(t_start) x_0 + sigma(t_start) eps.  (For schedules with sigma(0) > 0 the
closed form already carries noise at t=0; starting from clean x_0 would
reproduce a different variance profile.)
"""

from __future__ import annotations

import numpy as np

from ..schedules import Schedule

__all__ = ["forward_simulate_sde", "marginal_moments"]


def marginal_moments(schedule: Schedule, t: float, x0_mean, x0_var):
    """Closed-form mean and variance of x_t given data moments."""
    mu = schedule.mu(t)
    sig2 = schedule.sigma(t) ** 2
    return mu * np.asarray(x0_mean), mu**2 * np.asarray(x0_var) + sig2


def forward_simulate_sde(
    schedule: Schedule,
    x0_sampler,
    n_paths: int,
    n_steps: int,
    seed: int,
    *,
    t_start: float = 0.0,
    t_end: float = 1.0,
    dims: int = 1,
) -> np.ndarray:
    """Euler-Maruyama paths of the forward SDE; returns terminal states (n_paths, dims).

    x0_sampler is either a callable (n, rng) -> (n, dims) or an object with a
    ``sample(n, rng)`` method.  Drift and diffusion are evaluated at the left
    node of every step, so the grid must keep left nodes inside the schedule's
    non-singular domain (t_end = 1.0 itself is fine).
    """
    if n_steps < 1:
        raise ValueError("n_steps must be >= 1")
    if not t_start < t_end:
        raise ValueError("need t_start < t_end")
    rng = np.random.Generator(np.random.Philox(seed))
    draw = x0_sampler.sample if hasattr(x0_sampler, "sample") else x0_sampler
    x0 = np.asarray(draw(n_paths, rng), dtype=np.float64)
    if x0.ndim == 1:
        x0 = x0[:, None]
    if x0.shape != (n_paths, dims):
        raise ValueError(f"x0_sampler returned shape {x0.shape}, expected {(n_paths, dims)}")

    times = np.linspace(t_start, t_end, n_steps + 1)
    dt = times[1] - times[0]
    left = times[:-1]
    f = schedule.drift_coeff(left)
    g = np.sqrt(schedule.diffusion_coeff_sq(left))

    x = schedule.mu(t_start) * x0
    sig0 = schedule.sigma(t_start)
    if sig0 > 0:
        x = x + sig0 * rng.standard_normal((n_paths, dims))

    sqdt = np.sqrt(dt)
    for k in range(n_steps):
        x += dt * f[k] * x + g[k] * sqdt * rng.standard_normal((n_paths, dims))
        if not np.all(np.isfinite(x)):
            raise FloatingPointError(f"SDE simulation diverged at step {k + 1} (t={times[k + 1]:.6g})")
    return x
