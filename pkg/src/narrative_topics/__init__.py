"""Sentence-level narrative clustering and spread analytics.

Sentences are embedded, reduced with UMAP, grouped with HDBSCAN and labeled
with class-based TF-IDF keywords. Comments are then matched to the resulting
narrative clusters, and the clusters' publication history is summarized into
origination, spread and broadcaster/echoer statistics.
"""

__version__ = "0.1.0"

from .analytics import (
    OriginReport,
    SpreadGraph,
    assign_origins,
    build_spread_graph,
    comment_origin_attribution,
    spread_stats,
)
from .cluster import ClusterLabels, HdbscanParams, condense_and_extract, hdbscan, mst, mutual_reachability
from .corpus import (
    ArticleRecord,
    CommentRecord,
    Corpus,
    SentenceRecord,
    filter_comments,
    ingest_articles,
    split_sentences,
)
from .embed import EmbeddingMatrix, FileProvider, HashProvider, centroid, cosine, embed_batch
from .match import (
    MatchReport,
    MatchResult,
    cluster_centroids,
    match_comment,
    match_corpus,
    score_precision,
    sentence_level_filter,
    sweep_thresholds,
    user_concentration,
)
from .reduce import FuzzyGraph, UmapParams, fit_ab, fuzzy_union, knn_graph, optimize_layout, smooth_knn, umap_reduce
from .stats import StatResult, mann_whitney_u, pearson
from .topics import (
    TopicModel,
    build_topic_model,
    build_vocabulary,
    coherence,
    ctfidf_keywords,
    diversity,
    intra_cluster_similarity,
)

__all__ = [
    "ArticleRecord",
    "ClusterLabels",
    "CommentRecord",
    "Corpus",
    "EmbeddingMatrix",
    "FileProvider",
    "FuzzyGraph",
    "HashProvider",
    "HdbscanParams",
    "MatchReport",
    "MatchResult",
    "OriginReport",
    "SentenceRecord",
    "SpreadGraph",
    "StatResult",
    "TopicModel",
    "UmapParams",
    "assign_origins",
    "build_spread_graph",
    "build_topic_model",
    "build_vocabulary",
    "centroid",
    "cluster_centroids",
    "coherence",
    "comment_origin_attribution",
    "condense_and_extract",
    "cosine",
    "ctfidf_keywords",
    "diversity",
    "embed_batch",
    "filter_comments",
    "fit_ab",
    "fuzzy_union",
    "hdbscan",
    "ingest_articles",
    "intra_cluster_similarity",
    "knn_graph",
    "mann_whitney_u",
    "match_comment",
    "match_corpus",
    "mst",
    "mutual_reachability",
    "optimize_layout",
    "pearson",
    "score_precision",
    "sentence_level_filter",
    "smooth_knn",
    "split_sentences",
    "spread_stats",
    "sweep_thresholds",
    "umap_reduce",
    "user_concentration",
]
