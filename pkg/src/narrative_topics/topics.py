"""Per-cluster keywords via class-based TF-IDF, and topic quality scores."""

from __future__ import annotations

import itertools
import logging
import math
import re
from collections import Counter
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .corpus import STOPWORDS
from .embed import EmbeddingMatrix, EmbeddingProvider, centroid, embed_batch
from .errors import DegenerateCentroid, NoEligibleClusters, TooFewKeywords, UnknownCluster

logger = logging.getLogger(__name__)

TOP_N = 10
_WORD_RE = re.compile(r"[a-z0-9]+")


def tokens(text: str) -> list[str]:
    return _WORD_RE.findall(text.lower())


def terms(text: str, stopwords=STOPWORDS) -> list[str]:
    """Unigrams and bigrams of ``text``; bigrams never bridge a removed stopword."""
    out: list[str] = []
    run: list[str] = []
    for tok in tokens(text) + [None]:
        if tok is None or tok in stopwords:
            out.extend(run)
            out.extend(f"{a} {b}" for a, b in zip(run, run[1:]))
            run = []
        else:
            run.append(tok)
    return out


@dataclass
class TermStats:
    """Term counts per cluster plus the corpus-wide totals they sum to."""

    per_cluster: dict[int, Counter]
    total: Counter

    @classmethod
    def from_counts(cls, per_cluster: Mapping[int, Mapping[str, int]]) -> "TermStats":
        pc = {int(c): Counter(counts) for c, counts in per_cluster.items()}
        total: Counter = Counter()
        for counts in pc.values():
            total.update(counts)
        return cls(pc, total)

    @property
    def avg_tokens(self) -> float:
        if not self.per_cluster:
            return 0.0
        return sum(self.total.values()) / len(self.per_cluster)

    def scaled(self, factor: int) -> "TermStats":
        return TermStats.from_counts(
            {c: {t: v * factor for t, v in counts.items()} for c, counts in self.per_cluster.items()}
        )


def build_vocabulary(sentences, labels=None, min_count: int = 2) -> TermStats:
    """Count unigrams/bigrams per cluster, dropping outliers and rare terms.

    ``sentences`` may be :class:`SentenceRecord` objects or plain strings.
    Without ``labels`` every sentence goes to cluster 0.
    """
    texts = [s if isinstance(s, str) else s.text for s in sentences]
    if labels is None:
        labels = [0] * len(texts)
    raw: dict[int, Counter] = {}
    for text, lab in zip(texts, labels):
        lab = int(lab)
        if lab < 0:
            continue
        raw.setdefault(lab, Counter()).update(terms(text))
    total: Counter = Counter()
    for counts in raw.values():
        total.update(counts)
    keep = {t for t, v in total.items() if v >= min_count}
    per_cluster = {c: Counter({t: v for t, v in counts.items() if t in keep}) for c, counts in raw.items()}
    return TermStats(per_cluster, Counter({t: v for t, v in total.items() if t in keep}))


def ctfidf_weights(stats: TermStats, cluster: int) -> dict[str, float]:
    if cluster not in stats.per_cluster:
        raise UnknownCluster(f"cluster {cluster} has no term statistics")
    A = stats.avg_tokens
    return {
        t: tf * math.log(1.0 + A / stats.total[t])
        for t, tf in stats.per_cluster[cluster].items()
        if tf > 0
    }


def ctfidf_keywords(stats: TermStats, cluster: int, top_n: int = TOP_N) -> list[tuple[str, float]]:
    """Top ``top_n`` ``(term, weight)`` pairs, weight descending then term ascending."""
    weights = ctfidf_weights(stats, cluster)
    ranked = sorted(weights.items(), key=lambda kv: (-kv[1], kv[0]))
    return ranked[:top_n]


@dataclass
class TopicModel:
    cluster_members: dict[int, list[int]]
    keywords: dict[int, list[tuple[str, float]]] = field(default_factory=dict)
    centroids: dict[int, np.ndarray] = field(default_factory=dict)
    outlier_ids: list[int] = field(default_factory=list)

    @property
    def cluster_ids(self) -> list[int]:
        return sorted(self.cluster_members)

    def labels(self, n: int | None = None) -> np.ndarray:
        if n is None:
            n = 1 + max(
                itertools.chain(self.outlier_ids, *self.cluster_members.values()), default=-1
            )
        out = np.full(n, -1, dtype=np.int64)
        for c, members in self.cluster_members.items():
            out[members] = c
        return out

    def to_json(self, sample_size: int = 5) -> list[dict]:
        return [
            {
                "id": c,
                "keywords": [{"term": t, "weight": w} for t, w in self.keywords.get(c, [])],
                "sample_sentence_ids": self.cluster_members[c][:sample_size],
                "size": len(self.cluster_members[c]),
            }
            for c in self.cluster_ids
        ]


def compute_centroids(cluster_members: Mapping[int, Sequence[int]], X) -> dict[int, np.ndarray]:
    """Mean embedding per cluster; degenerate clusters are skipped with a warning."""
    data = X.data if isinstance(X, EmbeddingMatrix) else np.asarray(X)
    out = {}
    for c in sorted(cluster_members):
        if c < 0:
            continue
        try:
            out[c] = centroid(data[np.asarray(cluster_members[c], dtype=np.intp)])
        except DegenerateCentroid:
            logger.warning("cluster %d has a degenerate centroid; skipped", c)
    return out


def build_topic_model(sentences, labels, X=None, top_n: int = TOP_N, min_count: int = 2) -> TopicModel:
    """Group sentence ids by label, extract keywords, and (given ``X``) centroids.

    Sentence ids are positions in ``sentences``, which must line up with the
    rows of ``X``.
    """
    labels = np.asarray(labels, dtype=np.int64)
    members: dict[int, list[int]] = {}
    for i, lab in enumerate(labels):
        if lab >= 0:
            members.setdefault(int(lab), []).append(i)
    outliers = [int(i) for i in np.flatnonzero(labels < 0)]
    stats = build_vocabulary(sentences, labels, min_count=min_count)
    keywords = {c: ctfidf_keywords(stats, c, top_n) if c in stats.per_cluster else [] for c in members}
    model = TopicModel(members, keywords, {}, outliers)
    if X is not None:
        model.centroids = compute_centroids(members, X)
    return model


# ---------------------------------------------------------------------------
# quality scores
# ---------------------------------------------------------------------------


def _mean_pairwise_cosine(rows: np.ndarray) -> float:
    u = np.asarray(rows, dtype=np.float64)
    u = u / np.linalg.norm(u, axis=1, keepdims=True)
    n = u.shape[0]
    s = u.sum(axis=0)
    return float((s @ s - n) / (n * (n - 1)))


def coherence(model: TopicModel, provider: EmbeddingProvider) -> float:
    """Mean over topics of the keywords' mean pairwise cosine, rescaled to [0, 1]."""
    scores = []
    for c in model.cluster_ids:
        words = [t for t, _ in model.keywords.get(c, [])]
        if len(words) < 2:
            raise TooFewKeywords(f"cluster {c} has {len(words)} keyword(s)")
        emb = embed_batch(words, provider)
        scores.append((_mean_pairwise_cosine(emb.data) + 1.0) / 2.0)
    if not scores:
        raise TooFewKeywords("model has no topics")
    return float(np.clip(np.mean(scores), 0.0, 1.0))


def diversity(model: TopicModel) -> float:
    """Unique keyword terms divided by the number of keyword slots."""
    lists = [[t for t, _ in model.keywords.get(c, [])] for c in model.cluster_ids]
    slots = sum(len(x) for x in lists)
    if slots == 0:
        return 0.0
    return len(set(itertools.chain.from_iterable(lists))) / slots


def intra_cluster_similarity(model: TopicModel, X) -> float:
    """Mean over clusters (size >= 2) of mean pairwise member cosine."""
    data = X.data if isinstance(X, EmbeddingMatrix) else np.asarray(X)
    scores = [
        _mean_pairwise_cosine(data[np.asarray(m, dtype=np.intp)])
        for _, m in sorted(model.cluster_members.items())
        if len(m) >= 2
    ]
    if not scores:
        raise NoEligibleClusters("no cluster has two or more members")
    return float(np.mean(scores))


def write_topics_json(model: TopicModel, path) -> None:
    from .export import dumps_json

    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(dumps_json(model.to_json()))
