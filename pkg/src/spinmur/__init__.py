"""Entropic measurement uncertainty relations for spin-1/2 observables."""
from .closed_forms import constants, mean_error_closed, sd2_bound, sd3_bound, sd_general_c, sd_inf_bound
from .entropy import EntropyValue, error_function, mean_error_quadrature, rel_entropy, tensor_identity_check
from .families import (
    FamilyParam,
    TargetPair,
    d2_family,
    d4_family,
    o_family,
    so3_density,
    so3_marginal,
    target_pair,
)
from .minimax import (
    GeneralBiObservable,
    OptResult,
    divergence,
    global_minimax,
    incompatibility_degree,
    mean_divergence,
    minimize_family,
    sup_over_states,
)
from .qubit import (
    BlochState,
    Direction,
    Effect,
    Povm,
    marginal,
    outcome_prob,
    povm_validate,
    rotate_effect,
    spin_observable,
)
from .sampler import SampleRun, empirical_error_function, sample_outcomes

__version__ = "0.1.0"
