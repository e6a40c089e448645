"""Shear microstructures on thin strips.

Single-slip shear states, the energy densities they minimize, rank-one
compatible kink constructions, recovery meshes for one-dimensional limit
profiles, their smoothed counterparts for penalized energies, and the
scaling gap against graph-constrained competitors.
"""

from .builders import (
    THETA_MAX_E1,
    THETA_MAX_E2,
    axis_family,
    change_shear,
    change_slip,
    extend_tails,
    kink_any,
    kink_axis,
    max_kink_angle,
    rotate_global,
    transition,
)
from .compatibility import (
    InterfaceCheck,
    check_interface,
    kink_shear_for_angle,
    rank_one_gap,
)
from .density import (
    CellEnergy,
    DensityValue,
    EnergyReport,
    convexify_oracle,
    energy_of_map,
    hard_density,
    reduced_density,
    segment_density,
    soft_density,
)
from .errors import (
    AngleTooLarge,
    AxisShearUnsupported,
    BadAlpha,
    BlowUp,
    CFLViolation,
    GridTooSmall,
    HTooLarge,
    Infeasible,
    InvalidRange,
    MeshFormatError,
    NotConnected,
    ProfileFormatError,
    ShortSegment,
    SlipformError,
)
from .geometry import (
    ShearState,
    SlipSystem,
    canonical_angle,
    canonical_angle_difference,
    decompose,
    first_column,
    is_admissible,
    make_shear,
    membership_residual,
    perp,
    rot,
    state_matrix,
)
from .lavrentiev import (
    ConstraintField,
    CurlResidual,
    GapResult,
    GapRow,
    SqueezeReport,
    curl_residual,
    evolve_constraint_family,
    gap_experiment,
    squeeze_measure,
    windowed_wave,
)
from .maps import (
    Cell,
    PiecewiseAffineMap,
    ValidationReport,
    Window,
    interface_graph,
    propagate_offsets,
    validate_map,
)
from .recovery import (
    ConvergenceTable,
    LimitProfile,
    RecoveryResult,
    SweepRow,
    TransitionInfo,
    build_recovery,
    lift_profile,
    limit_energy,
    recovery_sweep,
    suggest_max_height,
    zigzag_approximate,
    zigzag_deviation,
)
from .serialization import (
    MeshDocument,
    load_mesh,
    load_mesh_document,
    load_profile,
    mesh_from_dict,
    mesh_to_dict,
    save_mesh,
    save_profile,
    write_gap_csv,
    write_sweep_csv,
)
from .smooth import SmoothEnergy, SmoothRecovery, smooth_soft_recovery, soft_sweep

__version__ = "0.1.0"

__all__ = [
    "THETA_MAX_E1",
    "THETA_MAX_E2",
    "AngleTooLarge",
    "AxisShearUnsupported",
    "BadAlpha",
    "BlowUp",
    "CFLViolation",
    "Cell",
    "CellEnergy",
    "ConstraintField",
    "ConvergenceTable",
    "CurlResidual",
    "DensityValue",
    "EnergyReport",
    "GapResult",
    "GapRow",
    "GridTooSmall",
    "HTooLarge",
    "Infeasible",
    "InvalidRange",
    "InterfaceCheck",
    "LimitProfile",
    "MeshFormatError",
    "NotConnected",
    "PiecewiseAffineMap",
    "ProfileFormatError",
    "RecoveryResult",
    "ShearState",
    "ShortSegment",
    "SlipSystem",
    "SlipformError",
    "SmoothEnergy",
    "SmoothRecovery",
    "SqueezeReport",
    "SweepRow",
    "TransitionInfo",
    "ValidationReport",
    "Window",
    "axis_family",
    "build_recovery",
    "canonical_angle",
    "canonical_angle_difference",
    "change_shear",
    "change_slip",
    "check_interface",
    "convexify_oracle",
    "curl_residual",
    "decompose",
    "energy_of_map",
    "evolve_constraint_family",
    "extend_tails",
    "first_column",
    "gap_experiment",
    "hard_density",
    "interface_graph",
    "is_admissible",
    "kink_any",
    "kink_axis",
    "kink_shear_for_angle",
    "lift_profile",
    "limit_energy",
    "MeshDocument",
    "load_mesh",
    "load_mesh_document",
    "mesh_from_dict",
    "mesh_to_dict",
    "load_profile",
    "make_shear",
    "max_kink_angle",
    "membership_residual",
    "perp",
    "rot",
    "propagate_offsets",
    "rank_one_gap",
    "recovery_sweep",
    "reduced_density",
    "segment_density",
    "rotate_global",
    "save_mesh",
    "save_profile",
    "smooth_soft_recovery",
    "soft_density",
    "soft_sweep",
    "squeeze_measure",
    "state_matrix",
    "suggest_max_height",
    "transition",
    "validate_map",
    "windowed_wave",
    "write_gap_csv",
    "write_sweep_csv",
    "zigzag_approximate",
    "zigzag_deviation",
]
