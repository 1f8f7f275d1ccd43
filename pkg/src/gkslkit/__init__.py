"""Numerics for GKSL generators, their semigroups and Kraus representations."""

__version__ = "0.1.0"

from .channels import (
    apply,
    choi_from_kraus,
    choi_from_super,
    is_unital,
    kraus_from_choi,
    mix_kraus,
    super_apply,
    super_compose,
    super_from_choi,
    super_from_kraus,
    super_trace,
)
from .extraction import decompose, extract_generator, finite_difference_generator, order_diagnostics
from .gksl import (
    GkslGenerator,
    amplitude_damping,
    build_super,
    canonicalize,
    generator_distance,
    reduce_jumps,
    trace_identity_check,
)
from .kraus_align import align, closeness_experiment, kraus_map_distance, pad_to
from .operator_core import expm, herm_split, hs_inner, op_norms, psd_sqrt, traceless_part
from .semigroup import channel_at, psi_step, t0_max, trotter_channel, trotter_convergence
