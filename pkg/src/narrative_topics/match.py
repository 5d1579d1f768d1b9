"""Assign comments to narrative clusters by centroid cosine similarity.

Also home to the threshold sweep, the optional sentence-level second-stage
filter, user concentration statistics and the precision-labeling harness.
"""

from __future__ import annotations

import csv
from collections import Counter
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .corpus import CommentRecord
from .embed import EmbeddingMatrix, EmbeddingProvider, cosine_matrix, embed_batch
from .errors import (
    NoMatches,
    ProviderMismatch,
    UnknownTopicInLabels,
    UnlabeledRows,
    ZeroVector,
)
from .export import csv_text, write_text
from .topics import TopicModel, compute_centroids

DEFAULT_THRESHOLD = 0.6
SWEEP_THRESHOLDS = (0.4, 0.5, 0.6, 0.7)
# slack for the sentence-level filter so exact duplicates are not lost to rounding
FILTER_EPS = 1e-12


@dataclass(frozen=True)
class MatchResult:
    comment_id: str
    cluster: int
    similarity: float
    matched: bool


@dataclass
class MatchReport:
    results: list[MatchResult]
    threshold: float
    mapped_fraction: float
    per_cluster_counts: dict[int, int] = field(default_factory=dict)
    per_day_counts: dict = field(default_factory=dict)
    per_community_counts: dict[str, int] = field(default_factory=dict)
    community: str = ""

    @property
    def matched_count(self) -> int:
        return sum(r.matched for r in self.results)

    def matched_ids(self) -> set[str]:
        return {r.comment_id for r in self.results if r.matched}


def cluster_centroids(model: TopicModel, X) -> dict[int, np.ndarray]:
    if model.centroids:
        return dict(sorted(model.centroids.items()))
    return compute_centroids(model.cluster_members, X)


def _stack(centroids: Mapping[int, np.ndarray]):
    if not centroids:
        raise ValueError("no centroids to match against")
    ids = np.array(sorted(centroids), dtype=np.int64)
    return ids, np.vstack([np.asarray(centroids[c], dtype=np.float64) for c in ids])


def best_clusters(E, centroids: Mapping[int, np.ndarray], block_size: int = 4096):
    """Best cluster id and its cosine for every row of ``E`` (lowest id wins ties)."""
    ids, C = _stack(centroids)
    E = np.asarray(E, dtype=np.float64)
    if E.ndim == 1:
        E = E[None, :]
    best = np.empty(E.shape[0], dtype=np.int64)
    sims = np.empty(E.shape[0])
    for start in range(0, E.shape[0], block_size):
        S = cosine_matrix(E[start : start + block_size], C)
        arg = np.argmax(S, axis=1)
        best[start : start + S.shape[0]] = ids[arg]
        sims[start : start + S.shape[0]] = S[np.arange(S.shape[0]), arg]
    return best, sims


def match_comment(e, centroids: Mapping[int, np.ndarray], threshold: float = DEFAULT_THRESHOLD,
                  comment_id: str = "") -> MatchResult:
    e = np.asarray(e, dtype=np.float64)
    if not np.any(e):
        raise ZeroVector("comment embedding is the zero vector")
    best, sims = best_clusters(e, centroids)
    return MatchResult(comment_id, int(best[0]), float(sims[0]), bool(sims[0] >= threshold))


def sentence_level_filter(e, members, threshold: float = DEFAULT_THRESHOLD) -> bool:
    """Second-stage check against a cluster's individual sentences.

    Passes when the comment's mean cosine to the members is at least the
    members' own mean pairwise cosine. Single-member clusters fall back to
    the plain ``threshold`` test.
    """
    M = np.asarray(members, dtype=np.float64)
    if M.ndim == 1:
        M = M[None, :]
    sims = cosine_matrix(np.asarray(e, dtype=np.float64)[None, :], M)[0]
    if M.shape[0] < 2:
        return bool(sims[0] >= threshold)
    U = M / np.linalg.norm(M, axis=1, keepdims=True)
    s = U.sum(axis=0)
    n = U.shape[0]
    pairwise = (s @ s - n) / (n * (n - 1))
    return bool(sims.mean() >= pairwise - FILTER_EPS)


def _embed_comments(comments, X, provider, comment_embeddings):
    if comment_embeddings is None:
        if provider is None:
            raise ValueError("either provider or comment_embeddings is required")
        comment_embeddings = embed_batch([c.body for c in comments], provider,
                                         row_keys=[c.comment_id for c in comments])
    if isinstance(comment_embeddings, EmbeddingMatrix):
        if isinstance(X, EmbeddingMatrix) and comment_embeddings.provider_id != X.provider_id:
            raise ProviderMismatch(
                f"comments embedded with {comment_embeddings.provider_id}, sentences with {X.provider_id}"
            )
        E = comment_embeddings.data
    else:
        E = np.asarray(comment_embeddings)
    dim = X.dim if isinstance(X, EmbeddingMatrix) else np.asarray(X).shape[1]
    if E.shape[0] != len(comments):
        raise ProviderMismatch(f"{E.shape[0]} comment embeddings for {len(comments)} comments")
    if len(comments) and E.shape[1] != dim:
        raise ProviderMismatch(f"comment dim {E.shape[1]} differs from sentence dim {dim}")
    return E


def _report(comments: Sequence[CommentRecord], best, sims, threshold, passed=None) -> MatchReport:
    results = []
    per_cluster: Counter = Counter()
    per_day: Counter = Counter()
    per_comm: Counter = Counter()
    for i, c in enumerate(comments):
        ok = bool(sims[i] >= threshold)
        if passed is not None:
            ok = ok and bool(passed[i])
        results.append(MatchResult(c.comment_id, int(best[i]), float(sims[i]), ok))
        if ok:
            per_cluster[int(best[i])] += 1
            per_day[c.day] += 1
            per_comm[c.community] += 1
    n = len(results)
    matched = sum(r.matched for r in results)
    return MatchReport(
        results=results,
        threshold=float(threshold),
        mapped_fraction=matched / n if n else 0.0,
        per_cluster_counts=dict(sorted(per_cluster.items())),
        per_day_counts=dict(sorted(per_day.items())),
        per_community_counts=dict(sorted(per_comm.items())),
        community=",".join(sorted({c.community for c in comments})),
    )


def match_corpus(comments: Sequence[CommentRecord], model: TopicModel, X,
                 threshold: float = DEFAULT_THRESHOLD, provider: EmbeddingProvider | None = None,
                 comment_embeddings=None, sentence_filter: bool = False) -> MatchReport:
    """Match every comment to its nearest cluster centroid at ``threshold``."""
    comments = list(comments)
    if not comments:
        return _report([], [], [], threshold)
    E = _embed_comments(comments, X, provider, comment_embeddings)
    best, sims = best_clusters(E, cluster_centroids(model, X))
    passed = None
    if sentence_filter:
        data = X.data if isinstance(X, EmbeddingMatrix) else np.asarray(X)
        passed = [
            sentence_level_filter(E[i], data[model.cluster_members[int(best[i])]], threshold)
            if sims[i] >= threshold else False
            for i in range(len(comments))
        ]
    return _report(comments, best, sims, threshold, passed)


def sweep_thresholds(comments, model: TopicModel, X, thresholds=SWEEP_THRESHOLDS,
                     provider: EmbeddingProvider | None = None, comment_embeddings=None) -> dict[float, float]:
    """Mapped fraction per threshold, all from a single similarity pass."""
    thresholds = [float(t) for t in thresholds]
    if any(b < a for a, b in zip(thresholds, thresholds[1:])):
        raise ValueError("thresholds must be ascending")
    comments = list(comments)
    if not comments:
        return {t: 0.0 for t in thresholds}
    E = _embed_comments(comments, X, provider, comment_embeddings)
    _, sims = best_clusters(E, cluster_centroids(model, X))
    n = len(comments)
    return {t: int(np.count_nonzero(sims >= t)) / n for t in thresholds}


# ---------------------------------------------------------------------------
# user concentration
# ---------------------------------------------------------------------------


@dataclass
class UserConcentration:
    users_for_half: int
    share_of_authors: float
    n_authors: int
    curve: list[float]


def user_concentration(report: MatchReport, comments: Sequence[CommentRecord]) -> UserConcentration:
    """How few authors account for half of the matched comments."""
    author_of = {c.comment_id: c.author for c in comments}
    counts = Counter(author_of[r.comment_id] for r in report.results if r.matched)
    total = sum(counts.values())
    if total == 0:
        raise NoMatches("report has no matched comments")
    ordered = sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))
    cum = np.cumsum([v for _, v in ordered])
    k = int(np.searchsorted(cum, 0.5 * total, side="left")) + 1
    return UserConcentration(
        users_for_half=k,
        share_of_authors=k / len(ordered),
        n_authors=len(ordered),
        curve=[float(x) for x in cum / total],
    )


# ---------------------------------------------------------------------------
# export and precision harness
# ---------------------------------------------------------------------------

MATCH_COLUMNS = ["comment_id", "community", "author", "created_utc", "cluster", "similarity", "matched"]
SAMPLE_COLUMNS = ["topic", "comment_id", "similarity", "body", "verdict"]


def matches_csv(report: MatchReport, comments: Sequence[CommentRecord]) -> str:
    by_id = {c.comment_id: c for c in comments}
    rows = []
    for r in report.results:
        c = by_id[r.comment_id]
        rows.append([r.comment_id, c.community, c.author, c.created, r.cluster, r.similarity, int(r.matched)])
    return csv_text(MATCH_COLUMNS, rows)


def read_matches_csv(path) -> MatchReport:
    """Rebuild a report (results and counts) from ``matches.csv``."""
    comments, best, sims, matched = [], [], [], []
    with open(path, newline="", encoding="utf-8") as fh:
        for rec in csv.DictReader(fh):
            comments.append(CommentRecord(rec["comment_id"], rec["author"], rec["community"],
                                          int(rec["created_utc"]), ""))
            best.append(int(rec["cluster"]))
            sims.append(float(rec["similarity"]))
            matched.append(rec["matched"] in ("1", "True", "true"))
    threshold = min((s for s, m in zip(sims, matched) if m), default=DEFAULT_THRESHOLD)
    report = _report(comments, best, sims, -np.inf, passed=matched)
    report.threshold = threshold
    return report


def precision_sample(report: MatchReport, comments: Sequence[CommentRecord], top_k: int = 10,
                     random_k: int = 10, seed: int = 0) -> list[dict]:
    """Rows to hand-label: every matched comment of the top-k clusters plus random_k others."""
    by_id = {c.comment_id: c for c in comments}
    counts = Counter(r.cluster for r in report.results if r.matched)
    ranked = sorted(counts, key=lambda c: (-counts[c], c))
    top = ranked[:top_k]
    rest = sorted(ranked[top_k:])
    rng = np.random.default_rng(seed)
    extra = sorted(int(c) for c in rng.choice(rest, size=min(random_k, len(rest)), replace=False)) if rest else []
    chosen = list(top) + extra
    rows = []
    for topic in chosen:
        for r in report.results:
            if r.matched and r.cluster == topic:
                rows.append({
                    "topic": topic,
                    "comment_id": r.comment_id,
                    "similarity": r.similarity,
                    "body": by_id[r.comment_id].body if r.comment_id in by_id else "",
                    "verdict": "",
                })
    return rows


def write_precision_sample(rows: list[dict], path) -> None:
    write_text(path, csv_text(SAMPLE_COLUMNS, [[r[k] for k in SAMPLE_COLUMNS] for r in rows]))


def read_precision_sample(path) -> list[dict]:
    with open(path, newline="", encoding="utf-8") as fh:
        return [dict(rec) for rec in csv.DictReader(fh)]


_TRUE = {"correct", "1", "yes", "y", "true", "t"}
_FALSE = {"incorrect", "0", "no", "n", "false", "f"}


@dataclass
class PrecisionScore:
    per_topic: dict[int, float]
    per_topic_counts: dict[int, tuple[int, int]]
    overall: float
    labeled: int


def score_precision(rows: Sequence[Mapping], known_topics=None) -> PrecisionScore:
    """Precision (percent) per topic and overall from hand-labeled sample rows."""
    if not rows:
        raise UnlabeledRows("no labeled rows")
    known = None if known_topics is None else {int(t) for t in known_topics}
    tally: dict[int, list[int]] = {}
    for i, row in enumerate(rows):
        verdict = str(row.get("verdict", "") or "").strip().lower()
        if verdict in _TRUE:
            ok = 1
        elif verdict in _FALSE:
            ok = 0
        else:
            raise UnlabeledRows(f"row {i + 1} ({row.get('comment_id', '?')}) has no usable verdict")
        topic = int(row["topic"])
        if known is not None and topic not in known:
            raise UnknownTopicInLabels(f"row {i + 1} refers to unknown topic {topic}")
        t = tally.setdefault(topic, [0, 0])
        t[0] += ok
        t[1] += 1
    correct = sum(v[0] for v in tally.values())
    labeled = sum(v[1] for v in tally.values())
    return PrecisionScore(
        per_topic={t: 100.0 * c / n for t, (c, n) in sorted(tally.items())},
        per_topic_counts={t: (c, n) for t, (c, n) in sorted(tally.items())},
        overall=100.0 * correct / labeled,
        labeled=labeled,
    )
