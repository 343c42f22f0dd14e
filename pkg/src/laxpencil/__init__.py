"""laxpencil: pencils of r-matrix Poisson brackets on matrix polynomials.

Numerical realization of the rational-case multi-Hamiltonian structure:
the bracket pencil on gl(r) polynomials, spectral-curve invariants,
separation-of-variables divisor coordinates, Nijenhuis-coordinate
diagnostics, isospectral Lax flows with linearizing Abelian integrals, and
the Neumann oscillator as a built-in model.
"""

__version__ = "0.1.0"

from .algebra import (
    AlgebraError,
    ConvergenceError,
    LaurentMat,
    LaurentPoly,
    MatPoly,
    Poly,
    matpoly_eval,
    poly_from_samples,
    poly_roots,
    residue_infinity,
)
from .phasespace import (
    BracketPencil,
    CoordinateFunction,
    CotangentElement,
    PhasePoint,
    PhaseSpaceError,
    bracket,
    bracket_r_form,
    bracket_tensor_form,
    differential,
    jacobi_check,
    pairing,
    poisson_tensor_apply,
    r_apply,
    spanning_pencils,
    split,
)
from .spectral import (
    InvariantBasis,
    SpectralCurve,
    casimir_defect,
    casimir_sweep_reconstruction,
    char_curve,
    commutation_table,
    curve_differentials,
    genus,
    spectral_invariant,
)
from .sov import (
    CanonicalDefects,
    DivisorCoordinates,
    SectionChoice,
    SovError,
    canonical_relations_defect,
    compute_divisor,
    divisor_via_adjugate,
    lambda_coordinates,
    z_coordinates,
)
from .nijenhuis import (
    CoordinatePencilTensor,
    NijenhuisError,
    normal_form_check,
    orthogonality_defect,
    recursion_matrix,
)
from .flows import (
    CurveBranch,
    FlowsError,
    Trajectory,
    branch_points,
    branch_track,
    curve_point_at,
    divisor_trajectory,
    hamiltonian_vector_field,
    integrate,
    isospectral_drift,
    linear_fit_residual,
    linearizing_coordinates,
    linearizing_increment,
    linearizing_trajectory,
)
from .neumann import (
    NeumannError,
    NeumannState,
    build_phi,
    classical_energy,
    constraint_defects,
    eom_rhs,
    hamiltonian,
    integrate_neumann,
    lax_B,
    residue_energy,
    separation_coordinates,
)
