"""Core numerical library - framework agnostic."""

from .models import (
    ProblemSpec,
    Decomposition,
    SpectralCertificate,
    SolveReport,
    PropertyResult,
    SuiteSummary,
)
from .linalg import (
    DenseMatrix,
    DenseSymMatrix,
    EigenDecomposition,
    cholesky,
    solve_spd,
    sym_eig,
    gen_sym_eig,
    condition_estimate,
)
from .matrix_market import read_matrix, read_sym_matrix, write_matrix
from .pseudoinverse import (
    SurjectiveMap,
    PseudoInverseOperator,
    pseudo_inverse,
    weighted_pseudo_inverse,
    projector,
    schur_identity_check,
    kernel_basis,
    injectivity_witness,
)
from .schwarz import (
    ProductVector,
    SchwarzOperators,
    build_r_map,
    build_block_b,
    build_schwarz_operators,
    assemble_preconditioner,
    apply_preconditioner,
)
from .certify import (
    OperatorTriple,
    MinimaxResult,
    build_s,
    certify_via_pencil,
    certify_via_preconditioned_operator,
    certify_via_s_inner_product,
    certify_triple,
    verify_condition_i,
    verify_condition_ii,
    minimax_check,
)
from .model_problems import laplacian, strip_decomposition
from .pcg import pcg, iteration_bound
from .properties import run_property_suite
from .storage import InstanceStorage
from .config import RunConfig

__all__ = [
    # Models
    "ProblemSpec",
    "Decomposition",
    "SpectralCertificate",
    "SolveReport",
    "PropertyResult",
    "SuiteSummary",
    # Dense linear algebra
    "DenseMatrix",
    "DenseSymMatrix",
    "EigenDecomposition",
    "cholesky",
    "solve_spd",
    "sym_eig",
    "gen_sym_eig",
    "condition_estimate",
    "read_matrix",
    "read_sym_matrix",
    "write_matrix",
    # Pseudo-inverses
    "SurjectiveMap",
    "PseudoInverseOperator",
    "pseudo_inverse",
    "weighted_pseudo_inverse",
    "projector",
    "schur_identity_check",
    "kernel_basis",
    "injectivity_witness",
    # Additive Schwarz
    "ProductVector",
    "SchwarzOperators",
    "build_r_map",
    "build_block_b",
    "build_schwarz_operators",
    "assemble_preconditioner",
    "apply_preconditioner",
    # Certification
    "OperatorTriple",
    "MinimaxResult",
    "build_s",
    "certify_via_pencil",
    "certify_via_preconditioned_operator",
    "certify_via_s_inner_product",
    "certify_triple",
    "verify_condition_i",
    "verify_condition_ii",
    "minimax_check",
    # Model problems
    "laplacian",
    "strip_decomposition",
    # Solver
    "pcg",
    "iteration_bound",
    # Verification suite
    "run_property_suite",
    # Persistence and configuration
    "InstanceStorage",
    "RunConfig",
]
