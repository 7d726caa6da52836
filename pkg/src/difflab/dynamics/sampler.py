"""Reverse samplers for the straight-line schedule.

One step of the reverse family, for any non-negative beta(t), is

    x_{t-dt} = A x_t + B * score_t(x_t) + C * eps,
    A = (1 - t + dt) / (1 - t),
    B = (1 + beta) * dt / (1 - t) * sigma^2,
    C = sqrt(2 beta dt / (1 - t)) * sigma * t^nu,

all sharing the forward marginals.  beta = (1 - t)/dt makes the
deterministic part the conditional expectation E[x_{t-dt} | x_t] (the
MSE-optimal estimate) and reduces the update to

    x_{t-dt} = ((1 - t + dt)/(1 - t)) (x_t + sigma^2 score) + t^nu sqrt(2) sigma eps,

which is the production sampling rule; with a trained noise predictor,
sigma^2 score is supplied as -sigma * eps_hat.  Chains start from
sigma * N(0, I) and skip the singular t=1 step, so a T-step chain costs
exactly T-1 network evaluations (no noise is added on the final step).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Union

import numpy as np

from ..mixtures import GaussianMixture, marginal_at
from ..schedules import StraightLineSchedule
from .._kernels import backend

__all__ = [
    "SamplerConfig",
    "time_grid",
    "annealed_noise_scale",
    "sldm_reverse_step",
    "generalized_reverse_step",
    "ChainResult",
    "sample_chain",
    "mixture_chain_1d",
]

BetaMode = Union[str, float, Callable[[float, float], float]]


@dataclass(frozen=True)
class SamplerConfig:
    """Reverse-chain settings: step count, noise level, annealing, beta family."""

    steps: int
    sigma: float
    nu: float = 0.0
    beta_mode: BetaMode = "mse_optimal"
    seed: int = 0
    gamma: float = 1.0       # power-law grid exponent; 1 = uniform
    init_scale: float = 1.0  # multiplier on the sigma*N(0,I) initial draw

    def __post_init__(self):
        if self.steps < 2:
            raise ValueError("steps must be >= 2")
        if self.sigma <= 0:
            raise ValueError("sigma must be > 0")
        if self.nu < 0:
            raise ValueError("nu must be >= 0")
        if self.gamma < 1:
            raise ValueError("gamma must be >= 1")


def time_grid(steps: int, gamma: float = 1.0) -> np.ndarray:
    """Grid t_i = 1 - (1 - i/steps)^gamma, i = 0..steps (ascending).

    gamma = 1 is uniform; gamma > 1 concentrates nodes near t = 1 where the
    trajectory bends most.
    """
    i = np.arange(steps + 1, dtype=np.float64)
    return 1.0 - (1.0 - i / steps) ** gamma


def annealed_noise_scale(t: float, nu: float, sigma: float) -> float:
    """Injected-noise scale t^nu * sqrt(2) * sigma of the annealed rule."""
    return t**nu * math.sqrt(2.0) * sigma


def _resolve_beta(beta_mode: BetaMode, t: float, dt: float) -> float:
    if callable(beta_mode):
        beta = float(beta_mode(t, dt))
    elif beta_mode == "mse_optimal":
        beta = (1.0 - t) / dt
    elif beta_mode == "zero":
        beta = 0.0
    elif isinstance(beta_mode, (int, float)):
        beta = float(beta_mode)
    else:
        raise ValueError(f"unknown beta_mode {beta_mode!r}")
    if beta < 0:
        raise ValueError(f"beta(t) must be >= 0, got {beta} at t={t}")
    return beta


def _check_step_times(t: float, dt: float) -> None:
    if not 0.0 < t < 1.0:
        raise ValueError(f"reverse step needs t in (0, 1); the t=1 step is always skipped (t={t})")
    if not 0.0 < dt <= t:
        raise ValueError(f"need 0 < dt <= t (t={t}, dt={dt})")


def sldm_reverse_step(x, t: float, dt: float, sigma: float, *, score=None, eps_hat=None):
    """Deterministic part of the MSE-optimal reverse step, E[x_{t-dt} | x_t].

    Supply either the score value at (x, t) or a noise prediction eps_hat
    (sigma^2 score = -sigma eps_hat).  Injected noise is the caller's
    business, via annealed_noise_scale.
    """
    _check_step_times(t, dt)
    if (score is None) == (eps_hat is None):
        raise ValueError("supply exactly one of score= or eps_hat=")
    x = np.asarray(x, dtype=np.float64)
    inner = x + sigma**2 * np.asarray(score) if score is not None else x - sigma * np.asarray(eps_hat)
    return ((1.0 - t + dt) / (1.0 - t)) * inner


def generalized_reverse_step(x, t: float, dt: float, score, sigma: float, beta_t: float,
                             noise=None):
    """One step of the beta-family reverse rule; beta_t = 0 is the bare Euler
    step of the probability-flow ODE.  Pass pre-drawn standard noise to get a
    stochastic step; with noise=None the conditional mean is returned."""
    _check_step_times(t, dt)
    if beta_t < 0:
        raise ValueError(f"beta_t must be >= 0, got {beta_t}")
    x = np.asarray(x, dtype=np.float64)
    a = (1.0 - t + dt) / (1.0 - t)
    b = (1.0 + beta_t) * dt / (1.0 - t) * sigma**2
    mean = a * x + b * np.asarray(score)
    if noise is None:
        return mean
    c = math.sqrt(2.0 * beta_t * dt / (1.0 - t)) * sigma
    return mean + c * np.asarray(noise)


@dataclass(frozen=True)
class ChainResult:
    samples: np.ndarray  # (n_samples, dims)
    nfe: int             # model/score evaluations actually issued
    label_evals: int = 0


def _step_coefficients(config: SamplerConfig):
    """Per-step (t, A, B/sigma^2-free score coefficient, noise scale) arrays.

    Steps run i = T-1 .. 1 over the (possibly power-law) grid; noise is only
    injected while i > 1.
    """
    grid = time_grid(config.steps, config.gamma)
    ts, coef_x, coef_score, coef_noise = [], [], [], []
    for i in range(config.steps - 1, 0, -1):
        t = float(grid[i])
        dt = float(grid[i] - grid[i - 1])
        beta = _resolve_beta(config.beta_mode, t, dt)
        a = (1.0 - t + dt) / (1.0 - t)
        b = (1.0 + beta) * dt / (1.0 - t) * config.sigma**2
        if i > 1:
            c = math.sqrt(2.0 * beta * dt / (1.0 - t)) * config.sigma * t**config.nu
        else:
            c = 0.0
        ts.append(t)
        coef_x.append(a)
        coef_score.append(b)
        coef_noise.append(c)
    return grid, np.array(ts), np.array(coef_x), np.array(coef_score), np.array(coef_noise)


def sample_chain(model_or_score, config: SamplerConfig, *, dims: int = 1,
                 n_samples: int = 1) -> ChainResult:
    """Run the reverse chain from sigma * N(0, I).

    model_or_score is either a callable score(x, t) -> array or an object
    with predict_eps(x, t) (a trained noise predictor).  Exactly
    config.steps - 1 evaluations are issued, one per step, batched over
    samples.
    """
    if hasattr(model_or_score, "predict_eps"):
        def score_eval(x, t):
            return -np.asarray(model_or_score.predict_eps(x, t)) / config.sigma
    elif callable(model_or_score):
        def score_eval(x, t):
            return np.asarray(model_or_score(x, t))
    else:
        raise TypeError("model_or_score must be callable or expose predict_eps")

    rng = np.random.Generator(np.random.Philox(config.seed))
    x = config.sigma * config.init_scale * rng.standard_normal((n_samples, dims))
    _, ts, coef_x, coef_score, coef_noise = _step_coefficients(config)
    nfe = 0
    for s in range(ts.shape[0]):
        sc = score_eval(x, ts[s])
        nfe += 1
        x = coef_x[s] * x + coef_score[s] * sc
        if coef_noise[s] != 0.0:
            x += coef_noise[s] * rng.standard_normal((n_samples, dims))
        if not np.all(np.isfinite(x)):
            raise FloatingPointError(f"chain diverged at step {s + 1} (t={ts[s]:.6g})")
    return ChainResult(x, nfe)


def mixture_chain_1d(data: GaussianMixture, config: SamplerConfig,
                     n_samples: int) -> ChainResult:
    """Fused reverse chain for a 1-D mixture with the analytic score.

    Matches sample_chain(score_function(data, StraightLineSchedule(sigma)), ...)
    draw for draw; the per-step marginal parameters are precomputed and the
    loop runs in the kernel backend.
    """
    if data.dims != 1:
        raise ValueError("mixture_chain_1d is 1-D only")
    sched = StraightLineSchedule(config.sigma)
    _, ts, coef_x, coef_score, coef_noise = _step_coefficients(config)
    n_steps = ts.shape[0]
    step_means = np.empty((n_steps, data.n_components))
    step_vars = np.empty((n_steps, data.n_components))
    for s, t in enumerate(ts):
        marg = marginal_at(data, sched, float(t))
        step_means[s] = marg.means[:, 0]
        step_vars[s] = marg.variances[:, 0]

    rng = np.random.Generator(np.random.Philox(config.seed))
    x = config.sigma * config.init_scale * rng.standard_normal(n_samples)
    # draw noise only for steps that use it, in step order, so the stream
    # matches sample_chain draw for draw
    noisy = np.flatnonzero(coef_noise != 0.0)
    noise = np.zeros((n_steps, n_samples))
    noise[noisy] = rng.standard_normal((noisy.size, n_samples))
    x = backend.chain_chunk_1d(
        x, coef_x, coef_score, coef_noise, step_means, step_vars, np.log(data.weights), noise
    )
    return ChainResult(x[:, None], n_steps)
