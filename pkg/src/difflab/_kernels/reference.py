"""Pure-NumPy implementations of the hot kernels.

Every function here has a compiled twin in ``_core.pyx`` with identical
signatures and semantics; ``difflab._kernels.backend`` points at whichever
is available.  The 1-D Gaussian-mixture score sits in the innermost loop of
every sampler, Langevin and trajectory routine, which is what makes these
worth fusing.
"""

from __future__ import annotations

import numpy as np

NAME = "python"

_LOG_2PI = float(np.log(2.0 * np.pi))


def _log_joint_1d(x, logw, means, variances):
    z = x[:, None] - means[None, :]
    return logw[None, :] - 0.5 * (z * z / variances[None, :] + np.log(variances)[None, :] + _LOG_2PI)


def mixture_logpdf_1d(x, logw, means, variances):
    """log p(x) for a 1-D Gaussian mixture, log-sum-exp stabilized."""
    x = np.ascontiguousarray(x, dtype=np.float64)
    lj = _log_joint_1d(x, logw, means, variances)
    m = lj.max(axis=1)
    return m + np.log(np.sum(np.exp(lj - m[:, None]), axis=1))


def mixture_score_1d(x, logw, means, variances):
    """d/dx log p(x) for a 1-D Gaussian mixture."""
    x = np.ascontiguousarray(x, dtype=np.float64)
    lj = _log_joint_1d(x, logw, means, variances)
    m = lj.max(axis=1)
    r = np.exp(lj - m[:, None])
    r /= r.sum(axis=1, keepdims=True)
    per = -(x[:, None] - means[None, :]) / variances[None, :]
    return np.sum(r * per, axis=1)


def chain_chunk_1d(x, coef_x, coef_score, coef_noise, step_means, step_variances, logw, noise):
    """Run S reverse-sampler steps of the form

        x <- coef_x[s] * x + coef_score[s] * score_s(x) + coef_noise[s] * noise[s]

    where score_s is the score of the 1-D mixture with parameters
    (step_means[s], step_variances[s], logw).  Mutates and returns x.
    """
    for s in range(coef_x.shape[0]):
        sc = mixture_score_1d(x, logw, step_means[s], step_variances[s])
        x = coef_x[s] * x + coef_score[s] * sc
        if coef_noise[s] != 0.0:
            x += coef_noise[s] * noise[s]
    return x


def langevin_chunk_1d(x, drift_coef, noise_coef, means, variances, logw, noise):
    """Run noise.shape[0] tempered-Langevin steps against a fixed 1-D mixture:

        x <- x + drift_coef * score(x) + noise_coef * noise[s]

    Mutates and returns x.
    """
    for s in range(noise.shape[0]):
        x += drift_coef * mixture_score_1d(x, logw, means, variances)
        x += noise_coef * noise[s]
    return x
