"""Evolving topics, temporal topic-citation graphs, and emerging-topic detection.

The library turns a year-stamped, citation-linked document corpus into:

* content clusters intersected with citation communities (topics),
* per-period topic sub-clusters with term representations,
* a period-labeled topic-citation graph,
* per-period topic embeddings driven by citation context,
* emerging topic pairs/sets with predictability scores.

Every stage is usable on its own; the `atem` command line chains them with
persisted artifacts.
"""

from .corpus import (
    CitationEdge,
    Corpus,
    CorpusError,
    Document,
    Period,
    Timeline,
    ValidationReport,
    build_timeline,
    load_citations,
    load_corpus,
    validate,
)
from .doc_embedding import (
    DocEmbeddings,
    EmbedParams,
    build_vocabulary,
    load_doc_embeddings,
    tokenize,
    train_doc_embeddings,
)
from .clustering import (
    NOISE,
    ClusterAssignment,
    CommunityParams,
    DensityParams,
    TopicSet,
    aggregate,
    build_citation_graph,
    density_cluster,
    detect_communities,
    modularity,
    reduce_dimensions,
)
from .topics import (
    EvolvingTopic,
    TermVector,
    represent_ctfidf,
    represent_nearest_words,
    slice_topics,
)
from .topic_graph import (
    TopicCitationGraph,
    build_topic_citation_graph,
    connected_pairs,
    slice_graph,
)
from .graph_embedding import (
    TopicEmbeddingSeries,
    WalkParams,
    embedding_distance,
    generate_walks,
    train_dynamic_embeddings,
)
from .emergence import (
    DetectionParams,
    DetectionResult,
    EmergingTopic,
    cluster_period_embeddings,
    detect_new_neighbors,
    form_emerging_pair,
)
from .evaluation import (
    EvaluationReport,
    bootstrap_mean_difference,
    correlations,
    future_past_ratio,
    predictability,
    run_protocol,
)
from .synthetic import (
    EmergenceEvent,
    GroundTruth,
    SynthSpec,
    default_spec,
    generate_corpus,
    ground_truth_eval,
)

__version__ = "0.1.0"
