"""Near-linearity bound for the straight-line schedule.

For x_t = (1-t) x_0 + sigma eps and any data distribution, the trajectory
slope satisfies, per dimension,

    P( | dx_t/dt + x_t / (1 - t) | >= delta ) <= sigma^2 / (delta^2 (1 - t)^2),

a Chebyshev bound on the posterior-mean fluctuation.  The checker draws x_t
from the exact marginal, evaluates dx/dt in the posterior-mean form (which
reduces to -E[x_0 | x_t] here) and compares empirical violation frequencies
against the bound.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..mixtures import Distribution, marginal_at, posterior_mean
from ..schedules import StraightLineSchedule

__all__ = ["Theorem1Row", "theorem1_bound", "theorem1_check"]


@dataclass(frozen=True)
class Theorem1Row:
    sigma: float
    t: float
    delta: float
    bound: float
    violation_freq: float
    stderr: float

    @property
    def satisfied(self) -> bool:
        """Empirical frequency within bound plus three binomial standard errors."""
        return self.violation_freq <= min(self.bound, 1.0) + 3.0 * self.stderr


def theorem1_bound(sigma: float, delta: float, t: float) -> float:
    return sigma**2 / (delta**2 * (1.0 - t) ** 2)


def theorem1_check(data: Distribution, sigma: float, t_grid, delta: float,
                   n_samples: int, seed: int) -> list[Theorem1Row]:
    """Empirical violation frequency of the slope bound at each grid time."""
    if sigma <= 0 or delta <= 0:
        raise ValueError("sigma and delta must be > 0")
    sched = StraightLineSchedule(sigma)
    rows = []
    for j, t in enumerate(np.asarray(t_grid, dtype=np.float64)):
        if not 0.0 < t < 1.0:
            raise ValueError(f"t_grid must lie in (0, 1), got {t}")
        rng = np.random.Generator(np.random.Philox(key=seed + j))
        x = marginal_at(data, sched, float(t)).sample(n_samples, rng)
        # straight-line schedule: mu_dot = -1, sigma_dot = 0, so dx/dt = -E[x0|xt]
        dxdt = -posterior_mean(data, sched, float(t), x)
        # the bound is per dimension, so dimensions are pooled
        resid = np.abs(dxdt + x / (1.0 - t)).ravel()
        freq = float(np.mean(resid >= delta))
        stderr = float(np.sqrt(freq * (1.0 - freq) / resid.size))
        rows.append(Theorem1Row(sigma, float(t), delta, theorem1_bound(sigma, delta, float(t)),
                                freq, stderr))
    return rows
