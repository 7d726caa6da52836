"""Analytic reference distributions: diagonal Gaussian mixtures and point masses.

These supply exact log-densities, scores and posterior means under any noise
schedule, so every sampler and ODE routine in the package can be checked
against closed forms.  All densities are evaluated in log space with a
log-sum-exp reduction; schedule marginals routinely have variances of order
1e-3 where naive exponentials underflow.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq
from scipy.special import log_ndtr, logsumexp, ndtr

from .schedules import Schedule, SingularTimeError
from ._kernels import backend

__all__ = [
    "GaussianMixture",
    "DeltaDistribution",
    "marginal_at",
    "posterior_mean",
    "direct_posterior_mean",
    "score_function",
    "posterior_mean_function",
]

_LOG_2PI = float(np.log(2.0 * np.pi))


def _as_points(x, dims: int) -> tuple[np.ndarray, str]:
    """Coerce x to shape (n, dims); returns (points, mode) where mode records
    the caller's convention so outputs can be shaped to match:
    'scalar' | 'flat' (1-D batch of scalars) | 'single' (one d-vector) | 'batch'.
    """
    arr = np.asarray(x, dtype=np.float64)
    if not np.all(np.isfinite(arr)):
        raise ValueError("x must be finite")
    if arr.ndim == 0:
        if dims != 1:
            raise ValueError(f"scalar x but mixture has {dims} dims")
        return arr.reshape(1, 1), "scalar"
    if arr.ndim == 1:
        if arr.shape[0] == dims and dims > 1:
            return arr.reshape(1, dims), "single"
        if dims == 1:
            return arr.reshape(-1, 1), "flat"
        raise ValueError(f"x of shape {arr.shape} incompatible with dims={dims}")
    if arr.ndim == 2 and arr.shape[1] == dims:
        return arr, "batch"
    raise ValueError(f"x of shape {arr.shape} incompatible with dims={dims}")


def _shape_vector_out(out: np.ndarray, mode: str):
    """Shape a per-point vector output (n, d) to the caller's convention."""
    if mode == "scalar":
        return float(out[0, 0])
    if mode == "flat":
        return out[:, 0]
    if mode == "single":
        return out[0]
    return out


def _shape_scalar_out(out: np.ndarray, mode: str):
    """Shape a per-point scalar output (n,) to the caller's convention."""
    if mode in ("scalar", "single"):
        return float(out[0])
    return out


@dataclass(frozen=True)
class GaussianMixture:
    """Mixture of axis-aligned Gaussians: weights (K,), means (K, d), variances (K, d)."""

    weights: np.ndarray
    means: np.ndarray
    variances: np.ndarray

    def __post_init__(self):
        w = np.atleast_1d(np.asarray(self.weights, dtype=np.float64))
        m = np.atleast_2d(np.asarray(self.means, dtype=np.float64))
        v = np.atleast_2d(np.asarray(self.variances, dtype=np.float64))
        if m.shape != v.shape or m.shape[0] != w.shape[0]:
            raise ValueError(
                f"inconsistent component shapes: weights {w.shape}, means {m.shape}, variances {v.shape}"
            )
        if np.any(w <= 0):
            raise ValueError("weights must be positive")
        if abs(w.sum() - 1.0) > 1e-12:
            raise ValueError(f"weights must sum to 1 (got {w.sum()!r})")
        if np.any(v <= 0):
            raise ValueError("variances must be positive")
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "means", m)
        object.__setattr__(self, "variances", v)

    @property
    def dims(self) -> int:
        return self.means.shape[1]

    @property
    def n_components(self) -> int:
        return self.means.shape[0]

    def _log_component_densities(self, x: np.ndarray) -> np.ndarray:
        # x: (n, d) -> (n, K)
        diff = x[:, None, :] - self.means[None, :, :]
        quad = np.sum(diff * diff / self.variances[None, :, :], axis=2)
        lognorm = np.sum(np.log(self.variances), axis=1) + self.dims * _LOG_2PI
        return -0.5 * (quad + lognorm[None, :])

    def _log_joint(self, x: np.ndarray) -> np.ndarray:
        return np.log(self.weights)[None, :] + self._log_component_densities(x)

    def log_density(self, x):
        pts, mode = _as_points(x, self.dims)
        if self.dims == 1:
            out = backend.mixture_logpdf_1d(
                pts[:, 0], np.log(self.weights), self.means[:, 0], self.variances[:, 0]
            )
        else:
            out = logsumexp(self._log_joint(pts), axis=1)
        return _shape_scalar_out(out, mode)

    def responsibilities(self, x):
        """Posterior component probabilities p(k | x), shape (n, K)."""
        pts, mode = _as_points(x, self.dims)
        lj = self._log_joint(pts)
        r = np.exp(lj - logsumexp(lj, axis=1, keepdims=True))
        return r[0] if mode in ("scalar", "single") else r

    def score(self, x):
        """Gradient of log density at x; output matches the shape of x."""
        pts, mode = _as_points(x, self.dims)
        if self.dims == 1:
            out = backend.mixture_score_1d(
                pts[:, 0], np.log(self.weights), self.means[:, 0], self.variances[:, 0]
            )[:, None]
        else:
            r = self.responsibilities(pts)
            per_comp = -(pts[:, None, :] - self.means[None, :, :]) / self.variances[None, :, :]
            out = np.sum(r[:, :, None] * per_comp, axis=1)
        return _shape_vector_out(out, mode)

    def mean(self) -> np.ndarray:
        return self.weights @ self.means

    def variance(self) -> np.ndarray:
        m = self.mean()
        second = self.weights @ (self.variances + self.means**2)
        return second - m**2

    def sample(self, n: int, rng: np.random.Generator) -> np.ndarray:
        comp = rng.choice(self.n_components, size=n, p=self.weights)
        eps = rng.standard_normal((n, self.dims))
        return self.means[comp] + np.sqrt(self.variances[comp]) * eps

    # 1-D helpers used by trajectory studies ---------------------------------

    def cdf(self, x) -> np.ndarray:
        if self.dims != 1:
            raise ValueError("cdf only defined for 1-D mixtures")
        z = (np.asarray(x, dtype=np.float64)[..., None] - self.means[:, 0]) / np.sqrt(
            self.variances[:, 0]
        )
        return ndtr(z) @ self.weights

    def quantile(self, q: float) -> float:
        if self.dims != 1:
            raise ValueError("quantile only defined for 1-D mixtures")
        if not 0.0 < q < 1.0:
            raise ValueError("q must lie in (0, 1)")
        sd = np.sqrt(self.variances[:, 0])
        lo = float(np.min(self.means[:, 0] - 12 * sd))
        hi = float(np.max(self.means[:, 0] + 12 * sd))
        return brentq(lambda x: self.cdf(x) - q, lo, hi, xtol=1e-12)


@dataclass(frozen=True)
class DeltaDistribution:
    """Point mass at a fixed location; scores of its schedule marginals are exact."""

    point: np.ndarray

    def __post_init__(self):
        p = np.atleast_1d(np.asarray(self.point, dtype=np.float64))
        if not np.all(np.isfinite(p)):
            raise ValueError("point must be finite")
        object.__setattr__(self, "point", p)

    @property
    def dims(self) -> int:
        return self.point.shape[0]

    def mean(self) -> np.ndarray:
        return self.point

    def variance(self) -> np.ndarray:
        return np.zeros_like(self.point)

    def sample(self, n: int, rng: np.random.Generator) -> np.ndarray:
        return np.broadcast_to(self.point, (n, self.dims)).copy()


Distribution = GaussianMixture | DeltaDistribution


def marginal_at(data: Distribution, schedule: Schedule, t: float) -> GaussianMixture:
    """Exact mixture marginal of x_t = mu x_0 + sigma eps.

    Component k maps to N(mu m_k, mu^2 v_k + sigma^2); weights are unchanged.
    """
    mu = schedule.mu(t)
    var = schedule.sigma(t) ** 2
    if isinstance(data, DeltaDistribution):
        if var == 0.0:
            raise SingularTimeError("marginal of a point mass with sigma(t)=0 is degenerate")
        return GaussianMixture(
            np.ones(1), mu * data.point[None, :], np.full((1, data.dims), var)
        )
    if var == 0.0 and mu == 0.0:
        raise SingularTimeError("marginal degenerates to a point mass at t with mu=sigma=0")
    return GaussianMixture(data.weights, mu * data.means, mu**2 * data.variances + var)


def posterior_mean(data: Distribution, schedule: Schedule, t: float, x_t):
    """E[x_0 | x_t] computed from the marginal score:

        E[x_0 | x_t] = (x_t + sigma(t)^2 * score_t(x_t)) / mu(t).
    """
    mu = schedule.mu(t)
    if mu <= 0.0:
        raise SingularTimeError(f"posterior mean undefined where mu(t)=0 (t={t})")
    if isinstance(data, DeltaDistribution):
        pts, mode = _as_points(x_t, data.dims)
        out = np.broadcast_to(data.point, pts.shape).copy()
        return _shape_vector_out(out, mode)
    marg = marginal_at(data, schedule, t)
    pts, mode = _as_points(x_t, data.dims)
    out = (pts + schedule.sigma(t) ** 2 * marg.score(pts)) / mu
    return _shape_vector_out(out, mode)


def direct_posterior_mean(data: GaussianMixture, schedule: Schedule, t: float, x_t):
    """E[x_0 | x_t] by explicit Bayes over components: responsibility-weighted
    conjugate-Gaussian posterior means.  Kept algebraically independent of the
    score route so the two can cross-check each other."""
    mu = schedule.mu(t)
    var = schedule.sigma(t) ** 2
    if mu <= 0.0:
        raise SingularTimeError(f"posterior mean undefined where mu(t)=0 (t={t})")
    pts, mode = _as_points(x_t, data.dims)
    marg = marginal_at(data, schedule, t)
    r = marg.responsibilities(pts)  # (n, K)
    # per-component posterior mean of x_0 given x_t under prior N(m_k, v_k)
    post = (data.means[None, :, :] * var + pts[:, None, :] * mu * data.variances[None, :, :]) / (
        var + mu**2 * data.variances[None, :, :]
    )
    out = np.sum(r[:, :, None] * post, axis=1)
    return _shape_vector_out(out, mode)


def score_function(data: Distribution, schedule: Schedule):
    """Callable score(x, t) -> grad_x log p_t(x) for the schedule marginal."""

    if isinstance(data, DeltaDistribution):
        point = data.point

        def score(x, t):
            pts, mode = _as_points(x, point.shape[0])
            out = -(pts - schedule.mu(t) * point) / schedule.sigma(t) ** 2
            return _shape_vector_out(out, mode)

        return score

    def score(x, t):
        return marginal_at(data, schedule, t).score(x)

    return score


def posterior_mean_function(data: Distribution, schedule: Schedule):
    """Callable pm(x, t) -> E[x_0 | x_t = x]."""

    def pm(x, t):
        return posterior_mean(data, schedule, t, x)

    return pm
