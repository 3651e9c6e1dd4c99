"""Conditional nonclassical cavity-field states from ground-state post-selection.

A coherent cavity field interacts resonantly with a stream of two-level atoms
that enter and are detected in the ground state. The modules cover the
truncated Fock representation (:mod:`.fock`), the atom-field branch maps
(:mod:`.dynamics`), the post-selected state (:mod:`.postselect`),
squeezing and photon statistics (:mod:`.metrics`), the Wigner function
(:mod:`.wigner`) and sweeps / the CLI (:mod:`.sweep`, :mod:`.cli`).
"""

from .dynamics import (
    JointBlocks,
    closed_form_blocks,
    cosine_coupling_diag,
    excited_branch,
    ground_branch,
    joint_evolution_oracle,
)
from .errors import ConfigError, DegenerateTraceError, NumericalError, TruncationError, UndefinedMeanError
from .fock import (
    FieldState,
    LadderMatrix,
    ProtocolParams,
    annihilation,
    choose_cutoff,
    coherent_state,
    creation,
    default_cutoff,
    fock_state,
    number,
    validate_state,
)
from .metrics import (
    PhotonStats,
    QuadratureStats,
    beta_fn,
    mandel_q,
    photon_statistics,
    quadrature_moments_closed_form,
    quadrature_moments_trace,
    uncertainty_product,
)
from .postselect import PSOutcome, iterate_ps, ps_coefficient, ps_state, success_probability, success_probability_curve
from .wigner import GridSpec, WignerGrid, negativity_metrics, wigner_grid, wigner_parity_oracle, wigner_point

__version__ = "0.1.0"
