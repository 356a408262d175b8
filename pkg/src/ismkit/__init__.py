"""Interpretive structural modeling, MICMAC and Likert frequency analysis."""

from ismkit.engine import (
    Digraph,
    ISMReport,
    LevelPartition,
    Origin,
    PowerProfile,
    ReachabilityMatrix,
    build_digraph,
    compare_matrices,
    conical_matrix,
    dependence_power,
    driving_power,
    partition_levels,
    power_profile,
    rank_powers,
    run_ism,
    transitive_closure,
)
from ismkit.errors import ParameterError, ParseError, StructuralError, ToolkitError, ValidationError
from ismkit.factors import (
    Factor,
    FactorCatalog,
    FactorKind,
    Polarity,
    TaxonomyEdge,
    TaxonomyMapping,
    load_catalog,
    load_mapping,
    paper_catalog,
    validate_mapping,
)
from ismkit.micmac import Cluster, MicmacClassification, MicmacThresholds, chart_data, classify, compare_clusters
from ismkit.ssim import Relation, SsimMatrix, elicit_pairs, parse_ssim, to_initial_reachability
from ismkit.survey import (
    FrequencyRow,
    LikertResponse,
    aggregate_frequencies,
    breakdown_by,
    group_average,
)

__all__ = [
    "Digraph",
    "ISMReport",
    "LevelPartition",
    "Origin",
    "PowerProfile",
    "ReachabilityMatrix",
    "build_digraph",
    "compare_matrices",
    "conical_matrix",
    "dependence_power",
    "driving_power",
    "partition_levels",
    "power_profile",
    "rank_powers",
    "run_ism",
    "transitive_closure",
    "ParameterError",
    "ParseError",
    "StructuralError",
    "ToolkitError",
    "ValidationError",
    "Factor",
    "FactorCatalog",
    "FactorKind",
    "Polarity",
    "TaxonomyEdge",
    "TaxonomyMapping",
    "load_catalog",
    "load_mapping",
    "paper_catalog",
    "validate_mapping",
    "Cluster",
    "MicmacClassification",
    "MicmacThresholds",
    "chart_data",
    "classify",
    "compare_clusters",
    "Relation",
    "SsimMatrix",
    "elicit_pairs",
    "parse_ssim",
    "to_initial_reachability",
    "FrequencyRow",
    "LikertResponse",
    "aggregate_frequencies",
    "breakdown_by",
    "group_average",
]

__version__ = "0.1.0"
