"""Holevo, restricted and Shannon capacities of qubit channels in Bloch affine form."""
from .channel_core import (
    BlochVector,
    CPViolation,
    DomainError,
    QubitChannel,
    apply,
    choi_matrix,
    entropy,
    identity_channel,
    is_cp,
    make_amplitude_damping,
    make_cq,
    make_family,
    make_horizontal_cq,
    make_qc,
    make_shifted_depolarizing,
    make_squeezed,
    make_stretched,
    mix_channels,
    relative_entropy,
)
from .capacity import (
    CapacityResult,
    Ensemble,
    NoSignChangeError,
    NoSolutionError,
    average_ensembles,
    chi,
    divergence_radius_check,
    equidistance_check,
    find_crossing,
    optimize_global,
    optimize_horizontal,
    optimize_n_state,
    optimize_vertical,
    symmetric_triple_solve,
)
from .shannon import Povm, accessible_information, optimize_shannon

__version__ = "0.1.0"
