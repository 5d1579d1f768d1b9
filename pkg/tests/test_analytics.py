import datetime as dt

from hypothesis import given, settings
from hypothesis import strategies as st

from narrative_topics.analytics import (
    assign_origins,
    build_spread_graph,
    comment_origin_attribution,
    domain_statistics,
    reportable_correlation,
    spread_cdf,
)
from narrative_topics.corpus import SentenceRecord
from narrative_topics.match import MatchReport, MatchResult
from narrative_topics.stats import StatResult
from narrative_topics.topics import TopicModel

D = dt.date(2022, 1, 1)


def build(topics):
    """``topics`` maps topic id -> list of (domain, day offset); one sentence per article."""
    sentences, members = [], {}
    for t, arts in sorted(topics.items()):
        for j, (domain, off) in enumerate(arts):
            sid = len(sentences)
            sentences.append(SentenceRecord(sid, f"https://{domain}/{t}/{j}", domain, D + dt.timedelta(off), "x"))
            members.setdefault(t, []).append(sid)
    return TopicModel(members), sentences


def test_co_origination():
    model, sents = build({0: [("A", 4), ("B", 4), ("C", 8)]})
    o = assign_origins(model, sents).topics[0]
    assert o.originators == ("A", "B")
    assert o.first_day == D + dt.timedelta(4)


def test_single_domain_originates_everything():
    model, sents = build({0: [("A", 0)], 1: [("A", 2), ("A", 3)]})
    rep = assign_origins(model, sents)
    assert rep.originated_by("A") == [0, 1]


def test_spread_examples():
    model, sents = build({0: [("A", 0)], 1: [("A", 0), ("B", 1), ("B", 2), ("C", 3)]})
    rep = assign_origins(model, sents)
    assert (rep.topics[0].spread, rep.topics[0].external_articles) == (0, 0)
    assert (rep.topics[1].spread, rep.topics[1].external_articles) == (2, 3)
    assert rep.domains["A"].spread_cdf[:4] == [1.0, 0.5, 0.5, 0.0]


def test_graph_toy():
    model, sents = build({0: [("A", 0), ("B", 1), ("C", 2)]})
    g = build_spread_graph(assign_origins(model, sents))
    assert g.edges == {("A", "B"): 1, ("A", "C"): 1}
    assert [g.node_class(d) for d in "ABC"] == ["broadcaster", "echoer", "echoer"]


def test_graph_without_shared_topics():
    model, sents = build({0: [("A", 0)], 1: [("B", 0)]})
    g = build_spread_graph(assign_origins(model, sents))
    assert g.edges == {}
    assert {g.node_class(d) for d in "AB"} == {"echoer"}


def test_co_originators_are_not_receivers():
    model, sents = build({0: [("A", 0), ("B", 0), ("B", 3)]})
    assert build_spread_graph(assign_origins(model, sents)).edges == {}


def test_dot_is_ordered():
    model, sents = build({0: [("b.x", 0), ("a.x", 1)], 1: [("a.x", 0), ("c.x", 2)]})
    dot = build_spread_graph(assign_origins(model, sents)).to_dot()
    nodes = [line.split('"')[1] for line in dot.splitlines() if "[class=" in line]
    assert nodes == sorted(nodes)
    assert dot.startswith("digraph spread {") and dot.endswith("}\n")


def test_comment_attribution():
    model, sents = build({0: [("A", 0), ("B", 0)], 1: [("A", 0)], 2: [("C", 0)]})
    rep = assign_origins(model, sents)
    results = [MatchResult(f"c{i}", 0, 0.9, True) for i in range(5)]
    results += [MatchResult("d", 1, 0.9, True), MatchResult("e", 2, 0.1, False)]
    out = comment_origin_attribution(rep, MatchReport(results, 0.6, 6 / 7))
    assert out == {"A": 6, "B": 5, "C": 0}


def test_statistics_rows_and_reporting():
    model, sents = build({t: [("A", 0)] * (t + 2) + [("B", 1)] * (t % 3 + 1) for t in range(6)})
    rows = {r.test: r for r in domain_statistics(assign_origins(model, sents))}
    assert rows["mannwhitney:A"].result is None and rows["mannwhitney:A"].alpha == 0.005
    assert rows["pearson:A"].result is not None
    assert reportable_correlation(StatResult(0.9, 0.2, 5, 5)) is None
    assert reportable_correlation(StatResult(0.9, 0.01, 5, 5)) == 0.9


topic_strategy = st.dictionaries(
    st.integers(0, 5),
    st.lists(st.tuples(st.sampled_from(["a", "b", "c", "d"]), st.integers(0, 4)), min_size=1, max_size=8),
    min_size=1,
    max_size=6,
)


@settings(max_examples=150, deadline=None)
@given(topic_strategy)
def test_report_invariants(topics):
    model, sents = build(topics)
    rep = assign_origins(model, sents)
    graph = build_spread_graph(rep)
    for o in rep.topics.values():
        assert o.originators
        assert o.first_day == min(p for _, _, p in o.articles)
        assert o.origin_day_articles + o.originator_later_articles + o.external_articles == o.n_articles
        assert sum(o.article_counts.values()) == o.n_articles
    for d, rec in rep.domains.items():
        cdf = rec.spread_cdf
        assert all(x >= y for x, y in zip(cdf, cdf[1:]))
        if rec.origin_topics:
            assert cdf[0] == 1.0
        assert graph.out_degree(d) <= len(rec.origin_topics) * (len(rep.domains) - 1)
    assert all(s != r for s, r in graph.edges)
    for d in graph.nodes:
        assert (graph.node_class(d) == "broadcaster") == (graph.out_degree(d) > graph.in_degree(d))


def test_spread_cdf_empty():
    assert spread_cdf([]) == [0.0] * 10
