"""Forward SDE simulation, probability-flow ODE, reverse samplers, Langevin."""

from .langevin import langevin_mixture_1d, langevin_tempered, tempered_density_1d
from .ode import (
    TrajectoryRecord,
    curvature_profile,
    fit_convergence_order,
    integrate_ode,
    make_expectation_rhs,
    make_score_rhs,
    pf_ode_rhs,
    pf_ode_rhs_expectation,
)
from .sampler import (
    ChainResult,
    SamplerConfig,
    annealed_noise_scale,
    generalized_reverse_step,
    mixture_chain_1d,
    sample_chain,
    sldm_reverse_step,
    time_grid,
)
from .sde import forward_simulate_sde, marginal_moments
from .theorem import Theorem1Row, theorem1_bound, theorem1_check

__all__ = [
    "TrajectoryRecord",
    "curvature_profile",
    "fit_convergence_order",
    "integrate_ode",
    "make_expectation_rhs",
    "make_score_rhs",
    "pf_ode_rhs",
    "pf_ode_rhs_expectation",
    "ChainResult",
    "SamplerConfig",
    "annealed_noise_scale",
    "generalized_reverse_step",
    "mixture_chain_1d",
    "sample_chain",
    "sldm_reverse_step",
    "time_grid",
    "forward_simulate_sde",
    "marginal_moments",
    "langevin_tempered",
    "langevin_mixture_1d",
    "tempered_density_1d",
    "Theorem1Row",
    "theorem1_bound",
    "theorem1_check",
]
