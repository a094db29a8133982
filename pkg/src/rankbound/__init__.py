"""Rank-dependent bounds on mixedness and entanglement of teleportation resources."""

__version__ = "0.1.0"

from ._accel import backend
from .bounds import (
    BoundSet,
    FidelityCurves,
    Verdict,
    bound_set,
    classify,
    concurrence_lower_bound,
    fidelity_curves,
    linear_entropy_bound,
    linear_entropy_bound_exact,
    vn_entropy_bound,
)
from .harness import (
    ClaimSpec,
    SearchResult,
    VerificationReport,
    run_claim,
    search_counterexample,
)
from .kernel import EigenDecomposition, eigh, numerical_rank
from .measures import (
    MeasureSet,
    fidelity_from_f,
    linear_entropy,
    measure_all,
    purity,
    singlet_fraction_magic,
    singlet_fraction_optimize,
    spectrum_cmax,
    useful_for_teleportation,
    vn_entropy,
    wootters_concurrence,
)
from .states import (
    DensityMatrix,
    Spectrum,
    WernerParams,
    bell_basis,
    load_state,
    magic_basis,
    maximally_mixed,
    mems,
    pure_state,
    random_rank_r,
    save_state,
    werner,
)
