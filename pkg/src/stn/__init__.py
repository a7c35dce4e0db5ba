"""Sparse causal network reconstruction linking a risk parameter and macro series."""

__version__ = "0.1.0"

from .graph import (
    GraphKind,
    StnGraph,
    StnNode,
    compact_graph,
    export_adjacency,
    export_dot,
    export_json,
    extended_graph,
    is_acyclic,
    neighborhoods,
    risk_out_edges,
)
from .importance import (
    ImportanceEntry,
    ImportanceScale,
    Normalization,
    importance_scale,
    importance_to_csv,
    importance_to_json,
    scale_from_coefficients,
)
from .model import (
    CoefficientSet,
    ConstraintMask,
    Violation,
    check_coefficients,
    default_mask,
    mask_from_json,
    mask_to_json,
    set_pd_self_lag,
)
from .panel import (
    DesignMatrices,
    LogitDomainError,
    PanelFormatError,
    Role,
    TimeSeriesPanel,
    Transform,
    VariableMeta,
    apply_logit,
    build_design,
    invert_logit,
    load_csv,
    standardize,
    write_csv,
)
from .selection import (
    CvResult,
    FoldPlan,
    FoldScheme,
    cross_validate,
    cv_to_csv,
    cv_to_json,
    make_folds,
)
from .solver import (
    FitReport,
    RowFit,
    SolverConfig,
    coefficients_from_json,
    coefficients_to_json,
    fit,
    fit_path,
    fit_row,
    kkt_residual,
    lambda_max,
    objective,
)
from .synth import (
    RecoveryMetrics,
    StabilityMetrics,
    SupportCounts,
    SynthSpec,
    edge_metrics,
    generate,
    metrics_to_json,
    simulate,
    stability_metrics,
)
