"""Neighbor-type analysis of contextualized word embeddings.

Builds kNN graphs over instance embeddings and measures how lexical and
contextual semantic types are distributed among each instance's nearest
neighbors (NTP, NTMR, NTE), with aggregate reports, sentence-type
comparisons, an induced type hierarchy, and a synthetic benchmark.
"""

from .annotations import (
    Dataset,
    DatasetError,
    DatasetSummary,
    InstanceRecord,
    SemanticType,
    SentenceLabel,
    TYPE_ORDER,
    dataset_summary,
    parse_dataset,
    serialize_dataset,
)
from .bundles import (
    AlignedCorpus,
    AlignmentError,
    BundleError,
    EmbeddingBundle,
    VariantTag,
    align,
    load_bundle,
    write_bundle,
)
from .graph import (
    GraphError,
    NeighborGraph,
    build_graph,
    cosine,
    exhaustive_neighbors,
    read_graph,
    write_graph,
)
from .metrics import (
    MetricError,
    MetricRow,
    TypeDistribution,
    compute_metric_table,
    metric_metadata,
    nte,
    ntp,
    read_metric_csv,
    write_metric_csv,
)
from .reports import (
    Dendrogram,
    NeighborWordDistribution,
    ReportError,
    TypeMatrix,
    heatmap_by_lexical_type,
    induce_hierarchy,
    neighbor_word_distribution,
    per_word_ntmr,
    table_by_sentence_type,
)
from .stats import (
    ComparisonReport,
    HypothesisTest,
    MwuResult,
    compare_sentence_types,
    mann_whitney_u,
    stars,
)
from .synth import SynthConfig, SynthError, generate

__version__ = "0.1.0"

__all__ = [
    "AlignedCorpus",
    "AlignmentError",
    "BundleError",
    "ComparisonReport",
    "Dataset",
    "DatasetError",
    "DatasetSummary",
    "Dendrogram",
    "EmbeddingBundle",
    "GraphError",
    "HypothesisTest",
    "InstanceRecord",
    "MetricError",
    "MetricRow",
    "MwuResult",
    "NeighborGraph",
    "NeighborWordDistribution",
    "ReportError",
    "SemanticType",
    "SentenceLabel",
    "SynthConfig",
    "SynthError",
    "TYPE_ORDER",
    "TypeDistribution",
    "TypeMatrix",
    "VariantTag",
    "align",
    "build_graph",
    "compare_sentence_types",
    "compute_metric_table",
    "cosine",
    "dataset_summary",
    "exhaustive_neighbors",
    "generate",
    "heatmap_by_lexical_type",
    "induce_hierarchy",
    "load_bundle",
    "mann_whitney_u",
    "metric_metadata",
    "neighbor_word_distribution",
    "nte",
    "ntp",
    "parse_dataset",
    "per_word_ntmr",
    "read_graph",
    "read_metric_csv",
    "serialize_dataset",
    "stars",
    "table_by_sentence_type",
    "write_bundle",
    "write_graph",
    "write_metric_csv",
]
