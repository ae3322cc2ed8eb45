"""Two-view decomposition into common-source, distinctive-source, and noise
components, with uncorrelated common and distinctive latent factors within
and across views."""

from ._version import __version__
from .cca import CanonicalSystem, canonical_system, cross_matrix, whitened_scores
from .core import (
    ConfigError,
    DcdlfError,
    InputError,
    NumericalError,
    RankTriple,
    SvdFactors,
    ViewMatrix,
    compact_svd,
    full_svd,
    validate_view_pair,
)
from .decompose import (
    AuxiliaryBlock,
    Decomposition,
    PairWeights,
    cov_common,
    cov_distinct,
    dcca_common_reference,
    decompose,
    factor_samples,
    generate_auxiliary,
    pair_weights,
    source_matrices,
)
from .denoise import CovEstimate, SignalEstimate, signal_covariance, soft_threshold_signal
from .pipeline import (
    PipelineResult,
    choose_ranks,
    eigengap_rank,
    run_decomposition,
    run_invariant_checks,
)
from .population import (
    PopulationModel,
    population_cca,
    population_decomposition,
    verify_tri_orthogonality,
)
from .pve import PveTable, pve_correlation_form, pve_from_covs
from .simulate import (
    FactorModelSpec,
    GroundTruth,
    generate,
    implied_population_model,
    recovery_metrics,
)

__all__ = [
    "__version__",
    "AuxiliaryBlock",
    "CanonicalSystem",
    "ConfigError",
    "CovEstimate",
    "DcdlfError",
    "Decomposition",
    "FactorModelSpec",
    "GroundTruth",
    "InputError",
    "NumericalError",
    "PairWeights",
    "PipelineResult",
    "PopulationModel",
    "PveTable",
    "RankTriple",
    "SignalEstimate",
    "SvdFactors",
    "ViewMatrix",
    "canonical_system",
    "choose_ranks",
    "compact_svd",
    "cov_common",
    "cov_distinct",
    "cross_matrix",
    "dcca_common_reference",
    "decompose",
    "eigengap_rank",
    "factor_samples",
    "full_svd",
    "generate",
    "generate_auxiliary",
    "implied_population_model",
    "pair_weights",
    "population_cca",
    "population_decomposition",
    "pve_correlation_form",
    "pve_from_covs",
    "recovery_metrics",
    "run_decomposition",
    "run_invariant_checks",
    "signal_covariance",
    "soft_threshold_signal",
    "source_matrices",
    "validate_view_pair",
    "verify_tri_orthogonality",
    "whitened_scores",
]
