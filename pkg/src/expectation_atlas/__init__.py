"""Map the joint expectation-value body of a set of Hermitian operators.

The body E_S of n traceless Hermitian operators on an N-dimensional space is
the set of joint expectation vectors over all density matrices.  This package
traces its boundary from supporting half-spaces, classifies arbitrary target
vectors (interior / boundary / exterior) by a Newton-type flow in the space
of generalized Gibbs states, reconstructs the realizing state and the full
family of states sharing the target values, reduces two-party quantum
marginal problems to the same machinery, and provides algebraic membership
and purity certificates for full operator bases.
"""

from .boundary import (
    BoundaryFace,
    EigensetPoint,
    OuterHull,
    commuting_polytope,
    eigenset,
    face,
    sampled_outer_hull,
    sphere_directions,
    support_value,
    trace_boundary,
)
from .certificates import (
    PurityReport,
    is_member_positivity,
    positivity_matrix,
    purity_report,
    uncertainty_residual,
)
from .flow import (
    Classification,
    FlowParams,
    FlowResult,
    StateFamily,
    classify,
    exponential_decay_check,
    integrate_flow,
    marginal_operator_set,
    marginal_target,
    partial_trace,
    solve_marginal,
    state_family,
)
from .gibbs import (
    ThermalPoint,
    entropy,
    expectation_and_jacobian,
    expectation_map,
    gibbs_state,
    jacobian,
    log_partition,
    thermal_point,
)
from .linalg import (
    BasisSet,
    EigenDecomposition,
    NumericalError,
    OperatorSet,
    StructureTensors,
    ValidationError,
    build_basis,
    check_density,
    check_hermitian,
    coords_from_state,
    eig_hermitian,
    random_density,
    random_hermitian,
    split_traceless,
    state_from_coords,
    structure_tensors,
)

__version__ = "0.1.0"

__all__ = [
    "BasisSet",
    "BoundaryFace",
    "Classification",
    "EigenDecomposition",
    "EigensetPoint",
    "FlowParams",
    "FlowResult",
    "NumericalError",
    "OperatorSet",
    "OuterHull",
    "PurityReport",
    "StateFamily",
    "StructureTensors",
    "ThermalPoint",
    "ValidationError",
    "build_basis",
    "check_density",
    "check_hermitian",
    "classify",
    "commuting_polytope",
    "coords_from_state",
    "eig_hermitian",
    "eigenset",
    "entropy",
    "expectation_and_jacobian",
    "expectation_map",
    "exponential_decay_check",
    "face",
    "gibbs_state",
    "integrate_flow",
    "is_member_positivity",
    "jacobian",
    "log_partition",
    "marginal_operator_set",
    "marginal_target",
    "partial_trace",
    "positivity_matrix",
    "purity_report",
    "random_density",
    "random_hermitian",
    "sampled_outer_hull",
    "solve_marginal",
    "sphere_directions",
    "split_traceless",
    "state_family",
    "state_from_coords",
    "structure_tensors",
    "support_value",
    "thermal_point",
    "trace_boundary",
    "uncertainty_residual",
]
