"""difflab: a desk-scale numerical laboratory for diffusion-style generative
processes -- unified noise schedules, exact Gaussian-mixture references,
probability-flow ODE and truncation-error studies, straight-line reverse
samplers with temperature annealing, small trained denoisers, and
rotation-equivariant point-cloud generation."""

__version__ = "0.1.0"

from ._kernels import BACKEND_NAME
from .schedules import (
    SCHEDULE_KINDS,
    BayesianFlowSchedule,
    DDIMSchedule,
    FlowMatchingSchedule,
    Schedule,
    StraightLineSchedule,
    VESchedule,
    VPSchedule,
    make_schedule,
    validate_schedule,
)
from .mixtures import (
    DeltaDistribution,
    GaussianMixture,
    direct_posterior_mean,
    marginal_at,
    posterior_mean,
    posterior_mean_function,
    score_function,
)

__all__ = [
    "__version__",
    "BACKEND_NAME",
    "SCHEDULE_KINDS",
    "Schedule",
    "StraightLineSchedule",
    "VPSchedule",
    "VESchedule",
    "DDIMSchedule",
    "FlowMatchingSchedule",
    "BayesianFlowSchedule",
    "make_schedule",
    "validate_schedule",
    "GaussianMixture",
    "DeltaDistribution",
    "marginal_at",
    "posterior_mean",
    "direct_posterior_mean",
    "score_function",
    "posterior_mean_function",
]
