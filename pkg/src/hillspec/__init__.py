"""Spectra of -y'' + (a e^{-2ix} + b e^{2ix}) y = lambda y on [0, pi].

Two independent routes compute eigenvalues: shooting on the monodromy
(``monodromy``, ``spectra``) and finite sections of the Fourier recurrences
(``recurrence``).  ``localization`` checks disk containment and simplicity
thresholds, ``certificates`` verifies the supporting inequalities in exact
rational arithmetic, and ``sweep`` follows eigenvalues in the a-plane.
"""

from .certificates import (
    ALL_IDS,
    Certificate,
    certify_all,
    certify_chain,
    certify_estimation,
    certify_iteration_bound,
)
from .errors import (
    ContainmentViolation,
    CrossValidationError,
    DependencyError,
    HillSpecError,
    PreconditionError,
)
from .localization import (
    Disk,
    containment_check,
    disks_for,
    localize,
    simplicity_condition,
    threshold_report,
)
from .monodromy import (
    Monodromy,
    PotentialParams,
    discriminant_identity_check,
    fundamental_values,
    hill_discriminant,
    integrate_monodromy,
)
from .recurrence import (
    SymmetryClass,
    TridiagonalOperator,
    build_tridiagonal,
    coefficient_sequence,
    family_spectrum,
    self_orthogonality,
    tail_bound_check,
    truncated_spectrum,
)
from .spectra import (
    BoundaryCondition,
    SpectralClass,
    SpectralPoint,
    Spectrum,
    associated_function_check,
    classify,
    cross_validate,
    locate_eigenvalues,
    multiplicity,
)
from .sweep import (
    CollisionEvent,
    Ray,
    Segment,
    SweepGrid,
    find_degeneracies,
    find_minimal_degeneracy,
    track_trajectories,
)

__version__ = "0.1.0"

__all__ = [
    "ALL_IDS", "BoundaryCondition", "Certificate", "CollisionEvent", "ContainmentViolation",
    "CrossValidationError", "DependencyError", "Disk", "HillSpecError", "Monodromy",
    "PotentialParams", "PreconditionError", "Ray", "Segment", "SpectralClass",
    "SpectralPoint", "Spectrum", "SweepGrid", "SymmetryClass", "TridiagonalOperator",
    "associated_function_check", "build_tridiagonal", "certify_all", "certify_chain",
    "certify_estimation", "certify_iteration_bound", "classify", "coefficient_sequence",
    "containment_check", "cross_validate", "discriminant_identity_check", "disks_for",
    "family_spectrum", "find_degeneracies", "find_minimal_degeneracy", "fundamental_values",
    "hill_discriminant", "integrate_monodromy", "localize", "locate_eigenvalues",
    "multiplicity", "self_orthogonality", "simplicity_condition", "tail_bound_check",
    "threshold_report", "track_trajectories", "truncated_spectrum",
]
