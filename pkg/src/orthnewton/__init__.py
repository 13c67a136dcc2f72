"""Multiplicative Newton updates on the orthogonal group, with a damped
Levenberg-Marquardt variant, applied to kurtosis-contrast source separation.

The separating matrix is kept exactly orthogonal by composing rotations
C(t+1) = exp(D) C(t) with D skew-symmetric.  The quadratic model of the cost
in the skew coordinates is assembled in closed form from per-channel
statistics, rotated into symmetric/antisymmetric coordinates where it splits
into a small dense block and an identity block, and solved per iteration.
"""

from .costs import (
    CompositeCost,
    CostEvaluation,
    SeparableCost,
    cost_value,
    evaluate,
    kurtosis,
    make_neg_kurtosis,
    make_neg_kurtosis_squared,
)
from .ica import (
    CrosstalkReport,
    MixingSpec,
    WhiteningTransform,
    amari_index,
    crosstalk,
    final_statistics,
    global_transfer,
    make_mixing,
    make_sources,
    prewhiten,
    run_ica,
)
from .newton import (
    NewtonSystem,
    SolverError,
    SparsityReport,
    assemble,
    build_model_operator,
    model_value,
    reduced_gradient,
    solve_step,
    sparsity_report,
)
from .operators import (
    antisym_projector,
    antisym_slots,
    commutation_matrix,
    coords_from_skew,
    diag_projector,
    expm_skew,
    ortho_drift,
    pair_rotation,
    random_orthogonal,
    reorthogonalize,
    skew_from_coords,
    skew_pairs,
    sym_projector,
    sym_slots,
    unvec,
    vec,
)
from .optimizer import (
    FAILURE_TERMINATIONS,
    IterationRecord,
    OptimizerConfig,
    RunResult,
    run,
)

__version__ = "0.1.0"

__all__ = [
    "CompositeCost",
    "CostEvaluation",
    "CrosstalkReport",
    "FAILURE_TERMINATIONS",
    "IterationRecord",
    "MixingSpec",
    "NewtonSystem",
    "OptimizerConfig",
    "RunResult",
    "SeparableCost",
    "SolverError",
    "SparsityReport",
    "WhiteningTransform",
    "amari_index",
    "antisym_projector",
    "antisym_slots",
    "assemble",
    "build_model_operator",
    "commutation_matrix",
    "coords_from_skew",
    "cost_value",
    "crosstalk",
    "diag_projector",
    "evaluate",
    "expm_skew",
    "final_statistics",
    "global_transfer",
    "kurtosis",
    "make_mixing",
    "make_neg_kurtosis",
    "make_neg_kurtosis_squared",
    "make_sources",
    "model_value",
    "ortho_drift",
    "pair_rotation",
    "prewhiten",
    "random_orthogonal",
    "reduced_gradient",
    "reorthogonalize",
    "run",
    "run_ica",
    "skew_from_coords",
    "skew_pairs",
    "solve_step",
    "sparsity_report",
    "sym_projector",
    "sym_slots",
    "unvec",
    "vec",
]
