"""Tempered Langevin dynamics.

The process dx = (1/2) g^2 score(x) dt + tau g dW has stationary law
proportional to p(x)^(1/tau^2): tau = 1 recovers p, tau < 1 sharpens it
around the modes, tau > 1 flattens it.  Discretised with unit time step and
a small step scale g:

    x <- x + (1/2) g^2 score(x) + tau g xi,   xi ~ N(0, I).
"""

from __future__ import annotations

import numpy as np

from ..mixtures import GaussianMixture
from .._kernels import backend

__all__ = ["langevin_tempered", "langevin_mixture_1d", "tempered_density_1d"]

_DIVERGENCE_LIMIT = 1e8


def langevin_tempered(score_fn, tau: float, step_scale: float, n_steps: int, x_init,
                      seed: int, *, burn_in: int = 0, keep_every: int = 1) -> np.ndarray:
    """Run tempered Langevin chains; returns retained states flattened to (m, d).

    x_init has shape (n_chains, d) (a 1-D array is treated as n_chains scalar
    chains).  States are recorded every keep_every steps once burn_in steps
    have passed.  Divergent states abort.
    """
    if tau <= 0:
        raise ValueError("tau must be > 0")
    if step_scale <= 0:
        raise ValueError("step_scale must be > 0")
    if not 0 <= burn_in < n_steps:
        raise ValueError("need 0 <= burn_in < n_steps")
    x = np.asarray(x_init, dtype=np.float64).copy()
    if x.ndim == 1:
        x = x[:, None]
    rng = np.random.Generator(np.random.Philox(seed))
    half_g2 = 0.5 * step_scale**2
    tau_g = tau * step_scale
    kept = []
    for k in range(1, n_steps + 1):
        x += half_g2 * np.asarray(score_fn(x)) + tau_g * rng.standard_normal(x.shape)
        if np.max(np.abs(x)) > _DIVERGENCE_LIMIT:
            raise FloatingPointError(f"Langevin chain diverged at step {k}")
        if k > burn_in and (k - burn_in) % keep_every == 0:
            kept.append(x.copy())
    if not kept:
        raise ValueError("no states retained; lower burn_in or keep_every")
    return np.concatenate(kept, axis=0)


def langevin_mixture_1d(target: GaussianMixture, tau: float, step_scale: float,
                        n_steps: int, x_init, seed: int, *, burn_in: int = 0,
                        keep_every: int = 1, chunk: int = 256) -> np.ndarray:
    """Kernel-backed variant of langevin_tempered for a fixed 1-D mixture target.

    Retention semantics match langevin_tempered; noise is drawn in step chunks
    of at most `chunk` to bound memory.
    """
    if target.dims != 1:
        raise ValueError("langevin_mixture_1d is 1-D only")
    if tau <= 0 or step_scale <= 0:
        raise ValueError("tau and step_scale must be > 0")
    if not 0 <= burn_in < n_steps:
        raise ValueError("need 0 <= burn_in < n_steps")
    x = np.asarray(x_init, dtype=np.float64).ravel().copy()
    rng = np.random.Generator(np.random.Philox(seed))
    logw = np.log(target.weights)
    means = target.means[:, 0]
    variances = target.variances[:, 0]
    half_g2 = 0.5 * step_scale**2
    tau_g = tau * step_scale

    def run(m: int) -> None:
        nonlocal x
        while m > 0:
            block = min(chunk, m)
            noise = rng.standard_normal((block, x.shape[0]))
            x = backend.langevin_chunk_1d(x, half_g2, tau_g, means, variances, logw, noise)
            if np.max(np.abs(x)) > _DIVERGENCE_LIMIT:
                raise FloatingPointError("Langevin chain diverged")
            m -= block

    run(burn_in)
    kept = []
    for _ in range((n_steps - burn_in) // keep_every):
        run(keep_every)
        kept.append(x.copy())
    if not kept:
        raise ValueError("no states retained; lower burn_in or keep_every")
    return np.concatenate(kept, axis=0)[:, None]


def tempered_density_1d(target: GaussianMixture, tau: float, grid: np.ndarray) -> np.ndarray:
    """Numerically normalised p(x)^(1/tau^2) on a uniform grid (trapezoid rule)."""
    logp = target.log_density(grid[:, None]) / tau**2
    logp -= logp.max()
    dens = np.exp(logp)
    dens /= np.trapezoid(dens, grid)
    return dens
