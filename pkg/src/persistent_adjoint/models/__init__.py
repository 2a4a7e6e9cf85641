from .crn import (
    CrnSystem,
    crn_contraction_bound,
    crn_equilibrium_concentrations,
    crn_equilibrium_map_F,
    crn_step,
    crn_vjps,
    mass_action_residuals,
)
from .data import Dataset, generate_dataset, load_dataset, save_dataset
from .linear import linear_system
from .nn import NnSystem, nn_contraction_bound, nn_step, nn_vjps
from .parallel import lipschitz_bundle, make_parallel, squared_error_loss, squared_error_lipschitz
