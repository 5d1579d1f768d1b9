"""Topic origination, cross-domain spread, and the broadcaster/echoer graph.

A domain *originates* a topic when it published an article containing the
topic on the first day the topic appears anywhere in the corpus. An article
*contains* a topic when at least one of its sentences sits in the topic's
cluster.
"""

from __future__ import annotations

import datetime as dt
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .corpus import Corpus, SentenceRecord
from .errors import TooFewPoints, ZeroVariance
from .export import csv_text, fmt_float
from .match import MatchReport
from .stats import StatResult, mann_whitney_u, pearson
from .topics import TopicModel

SPREAD_MAX = 9
MW_ALPHA = 0.005  # 0.05 with a Bonferroni factor of 10
PEARSON_ALPHA = 0.05


@dataclass
class TopicOrigin:
    topic: int
    first_day: dt.date
    originators: tuple[str, ...]
    article_counts: dict[str, int]
    # (url, domain, published) of every containing article, sorted by (date, url)
    articles: list[tuple[str, str, dt.date]]

    @property
    def n_articles(self) -> int:
        return len(self.articles)

    @property
    def origin_day_articles(self) -> int:
        return sum(1 for _, d, p in self.articles if d in self.originators and p == self.first_day)

    @property
    def originator_later_articles(self) -> int:
        return sum(1 for _, d, p in self.articles if d in self.originators and p > self.first_day)

    @property
    def external_articles(self) -> int:
        return sum(1 for _, d, _ in self.articles if d not in self.originators)

    @property
    def spread(self) -> int:
        return len({d for _, d, _ in self.articles if d not in self.originators})


@dataclass
class DomainOrigin:
    domain: str
    origin_topics: list[int] = field(default_factory=list)
    avg_origin_articles: float = 0.0
    avg_non_origin_articles: float = 0.0
    avg_external_articles_per_origin_topic: float = 0.0
    spread_cdf: list[float] = field(default_factory=list)

    @property
    def origin_topic_count(self) -> int:
        return len(self.origin_topics)


@dataclass
class OriginReport:
    topics: dict[int, TopicOrigin]
    domains: dict[str, DomainOrigin]

    def originated_by(self, domain: str) -> list[int]:
        return [t for t, o in sorted(self.topics.items()) if domain in o.originators]

    def to_json(self) -> dict:
        return {
            "domains": {
                d: {
                    "avg_external_articles_per_origin_topic": x.avg_external_articles_per_origin_topic,
                    "avg_non_origin_articles": x.avg_non_origin_articles,
                    "avg_origin_articles": x.avg_origin_articles,
                    "origin_topic_count": x.origin_topic_count,
                    "origin_topics": x.origin_topics,
                    "spread_cdf": x.spread_cdf,
                }
                for d, x in sorted(self.domains.items())
            },
            "topics": [
                {
                    "article_counts": dict(sorted(o.article_counts.items())),
                    "external_articles": o.external_articles,
                    "first_day": o.first_day.isoformat(),
                    "id": t,
                    "originators": list(o.originators),
                    "spread": o.spread,
                }
                for t, o in sorted(self.topics.items())
            ],
        }


def _containing_articles(model: TopicModel, sentences: Sequence[SentenceRecord]):
    by_id = {s.sentence_id: s for s in sentences}
    out: dict[int, dict[str, SentenceRecord]] = {}
    for c, members in model.cluster_members.items():
        urls: dict[str, SentenceRecord] = {}
        for sid in members:
            s = by_id[sid]
            urls.setdefault(s.article_url, s)
        out[c] = urls
    return out


def assign_origins(model: TopicModel, corpus: Corpus | Sequence[SentenceRecord],
                   domains: Sequence[str] | None = None) -> OriginReport:
    """First day and originating domains for every topic, plus per-domain summaries.

    ``corpus`` is a :class:`Corpus` or the sentence list the model's ids refer
    to. ``domains`` adds domains that might not appear in any cluster.
    """
    sentences = corpus.sentences() if isinstance(corpus, Corpus) else list(corpus)
    all_domains = {s.domain for s in sentences}
    if isinstance(corpus, Corpus):
        all_domains |= {a.domain for a in corpus.articles}
    all_domains = sorted(all_domains | set(domains or ()))

    topics: dict[int, TopicOrigin] = {}
    for c, urls in sorted(_containing_articles(model, sentences).items()):
        if not urls:
            continue
        arts = sorted(((u, s.domain, s.published) for u, s in urls.items()), key=lambda a: (a[2], a[0]))
        first = arts[0][2]
        originators = tuple(sorted({d for _, d, p in arts if p == first}))
        counts = Counter(d for _, d, _ in arts)
        topics[c] = TopicOrigin(c, first, originators, dict(sorted(counts.items())), arts)

    domain_recs = {d: DomainOrigin(d) for d in all_domains}
    own_origin: dict[str, list[int]] = defaultdict(list)
    own_other: dict[str, list[int]] = defaultdict(list)
    external: dict[str, list[int]] = defaultdict(list)
    for t, o in topics.items():
        for d, k in o.article_counts.items():
            (own_origin if d in o.originators else own_other)[d].append(k)
        for d in o.originators:
            domain_recs[d].origin_topics.append(t)
            external[d].append(o.external_articles)
    for d, rec in domain_recs.items():
        rec.origin_topics.sort()
        rec.avg_origin_articles = float(np.mean(own_origin[d])) if own_origin[d] else 0.0
        rec.avg_non_origin_articles = float(np.mean(own_other[d])) if own_other[d] else 0.0
        rec.avg_external_articles_per_origin_topic = float(np.mean(external[d])) if external[d] else 0.0
    report = OriginReport(topics, domain_recs)
    for d, cdf in spread_stats(report).items():
        domain_recs[d].spread_cdf = cdf
    return report


def spread_cdf(spreads: Sequence[int], max_x: int = SPREAD_MAX) -> list[float]:
    """Fraction of topics reaching at least X other domains, for X = 0..max_x."""
    s = np.asarray(spreads)
    if s.size == 0:
        return [0.0] * (max_x + 1)
    return [float(np.mean(s >= x)) for x in range(max_x + 1)]


def spread_stats(report: OriginReport, max_x: int = SPREAD_MAX) -> dict[str, list[float]]:
    """Per-domain spread CDF over that domain's originating topics."""
    return {
        d: spread_cdf([report.topics[t].spread for t in report.originated_by(d)], max_x)
        for d in sorted(report.domains)
    }


# ---------------------------------------------------------------------------
# spread graph
# ---------------------------------------------------------------------------


@dataclass
class SpreadGraph:
    edges: dict[tuple[str, str], int]
    nodes: list[str]

    def out_degree(self, d: str) -> int:
        return sum(w for (s, _), w in self.edges.items() if s == d)

    def in_degree(self, d: str) -> int:
        return sum(w for (_, r), w in self.edges.items() if r == d)

    def node_class(self, d: str) -> str:
        return "broadcaster" if self.out_degree(d) > self.in_degree(d) else "echoer"

    def to_dot(self) -> str:
        lines = ["digraph spread {"]
        for d in sorted(self.nodes):
            lines.append(
                f'  "{d}" [class="{self.node_class(d)}", out_degree={self.out_degree(d)}, '
                f"in_degree={self.in_degree(d)}];"
            )
        for (s, r), w in sorted(self.edges.items()):
            lines.append(f'  "{s}" -> "{r}" [weight={w}];')
        lines.append("}")
        return "\n".join(lines) + "\n"


def build_spread_graph(report: OriginReport) -> SpreadGraph:
    """Edge d -> r counts d's originating topics that r wrote about afterwards."""
    edges: Counter = Counter()
    for o in report.topics.values():
        later = {d for _, d, p in o.articles if p > o.first_day and d not in o.originators}
        for origin in o.originators:
            for r in later:
                if r != origin:
                    edges[(origin, r)] += 1
    nodes = sorted(set(report.domains) | {d for e in edges for d in e})
    return SpreadGraph(dict(sorted(edges.items())), nodes)


# ---------------------------------------------------------------------------
# comments and statistics
# ---------------------------------------------------------------------------


def comment_origin_attribution(report: OriginReport, matches: MatchReport) -> dict[str, int]:
    """Matched comments landing in clusters each domain originated."""
    per_cluster = Counter(r.cluster for r in matches.results if r.matched)
    out = {d: 0 for d in sorted(report.domains)}
    for c, k in per_cluster.items():
        o = report.topics.get(c)
        if o is None:
            continue
        for d in o.originators:
            out[d] = out.get(d, 0) + k
    return out


@dataclass
class StatRow:
    test: str
    result: StatResult | None
    alpha: float
    note: str = ""

    @property
    def decision(self) -> str:
        if self.result is None:
            return "n/a"
        return "reject" if self.result.p_value <= self.alpha else "retain"


def domain_statistics(report: OriginReport, matches: MatchReport | None = None) -> list[StatRow]:
    """Per-domain origin-vs-non-origin Mann-Whitney tests and external-spread correlations."""
    rows = []
    for d in sorted(report.domains):
        origin_counts = [o.article_counts[d] for o in report.topics.values() if d in o.originators]
        other_counts = [
            o.article_counts[d] for o in report.topics.values()
            if d not in o.originators and d in o.article_counts
        ]
        res, note = None, ""
        if origin_counts and other_counts:
            res = mann_whitney_u(origin_counts, other_counts)
            if res.degenerate:
                note = "all values identical"
        else:
            note = "empty sample"
        rows.append(StatRow(f"mannwhitney:{d}", res, MW_ALPHA, note))

        topics = [report.topics[t] for t in report.originated_by(d)]
        x = [o.article_counts[d] for o in topics]
        y = [o.external_articles for o in topics]
        res, note = None, ""
        try:
            res = pearson(x, y)
        except (TooFewPoints, ZeroVariance) as exc:
            note = type(exc).__name__
        rows.append(StatRow(f"pearson:{d}", res, PEARSON_ALPHA, note))

    if matches is not None:
        per_cluster = Counter(r.cluster for r in matches.results if r.matched)
        ids = sorted(report.topics)
        x = [report.topics[t].n_articles for t in ids]
        y = [per_cluster.get(t, 0) for t in ids]
        res, note = None, ""
        try:
            res = pearson(x, y)
        except (TooFewPoints, ZeroVariance) as exc:
            note = type(exc).__name__
        rows.append(StatRow("pearson:articles_vs_comments", res, PEARSON_ALPHA, note))
    return rows


def reportable_correlation(result: StatResult | None, alpha: float = PEARSON_ALPHA):
    """Correlation to publish, or None when it is not significant at ``alpha``."""
    if result is None or result.p_value > alpha:
        return None
    return result.statistic


def stats_csv(rows: Sequence[StatRow]) -> str:
    out = []
    for r in rows:
        if r.result is None:
            out.append([r.test, "", "", "", "", fmt_float(r.alpha), r.decision, r.note])
        else:
            out.append([
                r.test, fmt_float(r.result.statistic), fmt_float(r.result.p_value),
                r.result.n, r.result.m, fmt_float(r.alpha), r.decision, r.note,
            ])
    return csv_text(["test", "statistic", "p_value", "n", "m", "alpha", "decision", "note"], out)
