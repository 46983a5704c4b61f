"""One-dimensional Mumford-Shah energies and their convex lift on weighted
combinations of SBV graphs: exact evaluation, constructive convex
decomposition, explicit column calibrations, and Dirichlet minimality
certificates."""

from .currents import (
    BranchForm,
    ColumnProfile,
    GraphCombination,
    branch_form,
    current_equal,
    graph,
    mass,
    restrict_outside,
    slice_profile,
)
from .decompose import (
    Decomposition,
    decompose,
    peel_layers,
    remove_cancellation,
    swap_adjacent_block,
)
from .errors import (
    CancellationError,
    DecompositionError,
    DomainMismatchError,
    MsliftError,
    ProfileSizeError,
    SimplexError,
    ValidationError,
)
from .lift import (
    CertificateReport,
    ColumnCalibration,
    LiftParams,
    LiftReport,
    build_column_calibration,
    certify_minimality,
    column_energy,
    column_energy_oracle,
    evaluate,
)
from .sbv import (
    Domain,
    Measurement,
    MsParams,
    Piece,
    SbvFunction,
    jump_set,
    ms_energy,
    regular_energy,
)
from .solver import DirichletSpec, brute_force_minimize, minimize, perturb_inside

__version__ = "0.1.0"

__all__ = [
    "BranchForm",
    "CancellationError",
    "CertificateReport",
    "ColumnCalibration",
    "ColumnProfile",
    "Decomposition",
    "DecompositionError",
    "DirichletSpec",
    "Domain",
    "DomainMismatchError",
    "GraphCombination",
    "LiftParams",
    "LiftReport",
    "Measurement",
    "MsliftError",
    "MsParams",
    "Piece",
    "ProfileSizeError",
    "SbvFunction",
    "SimplexError",
    "ValidationError",
    "branch_form",
    "brute_force_minimize",
    "build_column_calibration",
    "certify_minimality",
    "column_energy",
    "column_energy_oracle",
    "current_equal",
    "decompose",
    "evaluate",
    "graph",
    "jump_set",
    "mass",
    "minimize",
    "ms_energy",
    "peel_layers",
    "perturb_inside",
    "regular_energy",
    "remove_cancellation",
    "restrict_outside",
    "slice_profile",
    "swap_adjacent_block",
]
