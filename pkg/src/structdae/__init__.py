"""Structured DAE toolkit: structure checks, congruence canonical forms,
reductions to the dynamic core, and structure-preserving integration for
self-adjoint and skew-adjoint linear time-varying systems."""

from .errors import (
    BasisDeficiencyError,
    ConditioningError,
    ConstructionError,
    DimensionError,
    DomainError,
    IllPosedRankError,
    InertiaChangeError,
    ParameterError,
    ParityError,
    RankDropError,
    RegularityError,
    SingularityError,
    StageError,
    StructDaeError,
    StructureError,
    UnsupportedError,
)
from .matfun import (
    ConstantMatrixFunction,
    MatrixFunction,
    MatrixPair,
    PolynomialMatrixFunction,
    SampledMatrixFunction,
    TimeGrid,
    constant,
    dump_json,
    from_callable,
    identity,
    matrix_function_from_json,
    matrix_function_to_json,
    mf_add,
    mf_block,
    mf_derivative_function,
    mf_matmul,
    mf_scale,
    mf_sub,
    mf_transpose,
    pair_from_json,
    pair_to_json,
    poly,
    sample,
    zero,
)
from .structure import (
    CongruenceTransform,
    StructureReport,
    StructureTag,
    apply_congruence,
    apply_equivalence,
    classify,
    compose,
    default_tolerance,
    invert,
    remark1_convert,
    self_adjoint_residual,
    skew_adjoint_residual,
)
from .factor import (
    InertiaSplit,
    RankSplit,
    RowRankNormalization,
    SymRankSplit,
    rank_split,
    row_rank_normalize,
    smooth_inertia,
    sym_rank_split,
)
from .canonical import (
    LocalFormBlocks,
    ResidualRecord,
    SelfAdjointGlobalForm,
    SkewAdjointGlobalForm,
    SolutionBasis,
    brute_force_dimension,
    global_canonical_self,
    global_canonical_skew,
    solution_basis_constant,
    verify_local_form,
    verify_self_global_form,
    verify_skew_global_form,
)
from .reduce import (
    AffineRecovery,
    FlowCertificate,
    ReducedSystem,
    index1_reduce,
    self_adjoint_dynamic_extract,
    semidefinite_skew_reduce,
    stokes_reduce,
)
from .flow import (
    DissipationReport,
    FlowDiagnostics,
    FundamentalSolution,
    Trajectory,
    certify_flow,
    dissipation_monitor,
    flow_defect,
    fundamental_solution,
    hamiltonian_series,
    integrate_linear,
    integrate_reduced,
    simulate_phdae,
)
from .models import (
    CanonicalCircuit,
    MultibodySystem,
    PHDAEModel,
    StokesModel,
    build_circuit,
    build_circuit_canonical,
    build_multibody,
    build_optimal_control,
    build_stokes,
    circuit_permutation,
)

__version__ = "0.1.0"
