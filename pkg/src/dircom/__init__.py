"""Structural analysis of directed networks via sampled bivariate distributions."""

from .correlation import (
    CorrelationTable,
    avg_correlation,
    correlation_table,
    set_correlation,
    symmetrize,
)
from .detect import (
    MergeRecord,
    MergeTrace,
    VerificationReport,
    agglomerative_detect,
    verify_communities,
)
from .errors import (
    ConvergenceError,
    DircomError,
    EdgeListParseError,
    ValidationError,
    VerificationError,
)
from .graph import DirectedGraph, load_edge_list, load_edge_list_file
from .measures import (
    CommunityCheck,
    Partition,
    centrality,
    community_strength,
    is_community,
    modularity,
    relative_centrality,
)
from .sampling import (
    BivariateDistribution,
    SamplerSpec,
    StationaryDistribution,
    TransitionMatrix,
    backward_jump_transition,
    bivariate_from_chain,
    pagerank_transition,
    sampled_distribution,
    simple_walk_transition,
    stationary_distribution,
)
from .sbm import (
    ExperimentResult,
    ResultRow,
    SbmConfig,
    generate_sbm,
    overlap,
    run_experiment,
)

__version__ = "0.1.0"

__all__ = [
    "BivariateDistribution",
    "CommunityCheck",
    "ConvergenceError",
    "CorrelationTable",
    "DircomError",
    "DirectedGraph",
    "EdgeListParseError",
    "ExperimentResult",
    "MergeRecord",
    "MergeTrace",
    "Partition",
    "ResultRow",
    "SamplerSpec",
    "SbmConfig",
    "StationaryDistribution",
    "TransitionMatrix",
    "ValidationError",
    "VerificationError",
    "VerificationReport",
    "agglomerative_detect",
    "avg_correlation",
    "backward_jump_transition",
    "bivariate_from_chain",
    "centrality",
    "community_strength",
    "correlation_table",
    "generate_sbm",
    "is_community",
    "load_edge_list",
    "load_edge_list_file",
    "modularity",
    "overlap",
    "pagerank_transition",
    "relative_centrality",
    "run_experiment",
    "sampled_distribution",
    "set_correlation",
    "simple_walk_transition",
    "stationary_distribution",
    "symmetrize",
    "verify_communities",
]
