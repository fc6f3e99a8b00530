from .channel import generate_channels, effective_channel, pathloss_db, dbm_to_linear, random_phases
from .wmmse import sinr, mse, update_u, update_omega, weighted_sum_rate, surrogate_objective
from .active_bf import assemble_local_quadratic, solve_local_beamformer, centralized_active_update
from .passive_bf import assemble_passive_quadratic, solve_passive, lipschitz_estimate, project_ball

__all__ = [
    "generate_channels",
    "effective_channel",
    "pathloss_db",
    "dbm_to_linear",
    "random_phases",
    "sinr",
    "mse",
    "update_u",
    "update_omega",
    "weighted_sum_rate",
    "surrogate_objective",
    "assemble_local_quadratic",
    "solve_local_beamformer",
    "centralized_active_update",
    "assemble_passive_quadratic",
    "solve_passive",
    "lipschitz_estimate",
    "project_ball",
]
