from .fhn import FhnNetworkModel, fhn_stimulus_region, observation_zone_indices, von_neumann_neighbors
from .hmm import DiscreteHmm, hmm_exact_filter
from .linear_gaussian import LinearGaussianModel, kalman_filter
from .lorenz63 import Lorenz63Model, lorenz_log_likelihood, lorenz_transition
from .simulate import simulate

__all__ = [
    "DiscreteHmm",
    "FhnNetworkModel",
    "LinearGaussianModel",
    "Lorenz63Model",
    "fhn_stimulus_region",
    "hmm_exact_filter",
    "kalman_filter",
    "lorenz_log_likelihood",
    "lorenz_transition",
    "observation_zone_indices",
    "simulate",
    "von_neumann_neighbors",
]
