"""Statistical membership-inference auditing of machine unlearning.

Estimates the forgetting rate of a pending-audit feature set, modeled as a
mixture of member and non-member populations, via moment matching, kernel
mean embeddings, or entropy-regularized optimal transport, with bootstrap
percentile confidence intervals.  Also ships calculators for the associated
auditing-error bounds and synthetic generators for known-truth evaluation.
"""

from .bootstrap import (
    BootstrapConfig,
    bootstrap_resample,
    percentile_summary,
    run_bootstrap_audit,
)
from .bounds import (
    BoundInputs,
    auditing_bound,
    chi2_divergence,
    renyi_inf_divergence,
    statistical_error_term,
    tnr_curve,
)
from .estimators import Smia0Auditor, SmiaMAuditor, SmiaWAuditor
from .exceptions import (
    AllPointsIdenticalError,
    AllRowsRemovedError,
    AuditFailureError,
    DegenerateEmbeddingsError,
    DegeneratePopulationsError,
    DimensionMismatchError,
    EmptyMatrixError,
    NonFiniteValueError,
    NonProbabilityWeightsError,
    NotPSDError,
    NumericalUnderflowError,
    RaggedRowError,
    SmiaError,
    TooFewSamplesError,
    TooManyFailedGroupsError,
    ValidationError,
)
from .io import (
    AuditReport,
    load_feature_matrix,
    load_report,
    write_feature_matrix,
    write_report,
)
from .kernels import (
    EmbeddingGeometry,
    KernelSpec,
    embedding_geometry,
    gram_matrix,
    kernel_eval,
    median_heuristic,
    mmd2_biased,
    mmd2_unbiased,
    smia_m_alpha,
    smia_m_point_estimate,
)
from .moment import (
    Smia0Config,
    mixture_moments,
    residual,
    smia0_point_estimate,
    solve_alpha,
)
from .stats import MomentStats, estimate_moments, filter_outliers, mean_gap_outer
from .synth import GaussianPopulationSpec, gen_gaussian, gen_mixture
from .transport import (
    SinkhornConfig,
    TransportPlan,
    cost_matrix,
    default_epsilon,
    exact_ot_small,
    sinkhorn,
    smia_w_point_estimate,
)

__version__ = "0.1.0"

__all__ = [
    "AuditReport",
    "BootstrapConfig",
    "BoundInputs",
    "EmbeddingGeometry",
    "GaussianPopulationSpec",
    "KernelSpec",
    "MomentStats",
    "Smia0Auditor",
    "Smia0Config",
    "SmiaMAuditor",
    "SmiaWAuditor",
    "SinkhornConfig",
    "TransportPlan",
    "auditing_bound",
    "bootstrap_resample",
    "chi2_divergence",
    "cost_matrix",
    "default_epsilon",
    "embedding_geometry",
    "estimate_moments",
    "exact_ot_small",
    "filter_outliers",
    "gen_gaussian",
    "gen_mixture",
    "gram_matrix",
    "kernel_eval",
    "load_feature_matrix",
    "load_report",
    "mean_gap_outer",
    "median_heuristic",
    "mixture_moments",
    "mmd2_biased",
    "mmd2_unbiased",
    "percentile_summary",
    "renyi_inf_divergence",
    "residual",
    "run_bootstrap_audit",
    "sinkhorn",
    "smia0_point_estimate",
    "smia_m_alpha",
    "smia_m_point_estimate",
    "smia_w_point_estimate",
    "solve_alpha",
    "statistical_error_term",
    "tnr_curve",
    "write_feature_matrix",
    "write_report",
    # exceptions
    "SmiaError",
    "ValidationError",
    "EmptyMatrixError",
    "RaggedRowError",
    "NonFiniteValueError",
    "DimensionMismatchError",
    "TooFewSamplesError",
    "AllPointsIdenticalError",
    "NotPSDError",
    "NonProbabilityWeightsError",
    "AuditFailureError",
    "DegeneratePopulationsError",
    "DegenerateEmbeddingsError",
    "AllRowsRemovedError",
    "TooManyFailedGroupsError",
    "NumericalUnderflowError",
]
