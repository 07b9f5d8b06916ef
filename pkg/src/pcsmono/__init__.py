"""W-class and partially coherently superposed (PCS) qudit states, SCREN
entanglement measures and numerical checks of their monogamy relations."""

from .linalg_core import (
    DensityMatrix,
    LayoutError,
    PartitionMap,
    PureState,
    StateValidationError,
    SubsystemLayout,
    eigendecompose_hermitian,
    embed_parties,
    merge_parties,
    partial_trace,
    partial_transpose,
    schmidt_coefficients,
    trace_norm,
)
from .states import (
    DegenerateReductionError,
    PCSParams,
    PCSState,
    WClassCoefficients,
    build_coherent_superposition,
    build_pcs,
    build_w_state,
    canonical_phase,
    load_state,
    merge_wclass_coeffs,
    phase_damp,
    recognize_pcs,
    reduce_pcs_symbolic,
    sample_random_pcs,
    sample_random_wclass,
    save_state,
)
from .measures import (
    MeasureValue,
    NegativeMeasureError,
    negativity_pure,
    scren_pcs_one_vs_rest,
    scren_pcs_pair,
    scren_pure,
    tangle_pure_qubit,
)
from .convex_roof import (
    Decomposition,
    RoofOptions,
    RoofResult,
    eigen_ensemble,
    hjw_decomposition,
    minimize_roof,
    roof_objective,
    scren_mixed,
)
from .monogamy import (
    IndexVector,
    MonogamyOptions,
    MonogamyReport,
    ckw_residual_scren,
    enumerate_index_vectors,
    multiparty_scren_mixed,
    multiparty_scren_pure,
    strong_monogamy_residual,
    verify_pcs,
)

__version__ = "0.1.0"
