import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from narrative_topics.corpus import CommentRecord
from narrative_topics.errors import NoMatches, UnknownTopicInLabels, UnlabeledRows
from narrative_topics.match import (
    MatchReport,
    MatchResult,
    cluster_centroids,
    match_comment,
    match_corpus,
    precision_sample,
    score_precision,
    sentence_level_filter,
    sweep_thresholds,
    user_concentration,
)
from narrative_topics.topics import TopicModel


def _comments(n, authors=None):
    return [CommentRecord(f"c{i}", (authors or ["u"] * n)[i], "s", 1600000000 + 86400 * (i % 3), "x y z w")
            for i in range(n)]


def test_single_sentence_centroid():
    X = np.array([[1.0, 2.0], [3.0, 4.0]])
    cents = cluster_centroids(TopicModel({7: [1]}, outlier_ids=[0]), X)
    assert list(cents) == [7]
    assert np.array_equal(cents[7], X[1])


def test_degenerate_cluster_skipped():
    X = np.array([[1.0, 0.0], [-1.0, 0.0], [0.0, 1.0]])
    assert list(cluster_centroids(TopicModel({0: [0, 1], 1: [2]}), X)) == [1]


def test_match_comment_examples():
    r = match_comment([0.0, 1.0], {7: np.array([0.0, 2.0])})
    assert (r.cluster, r.similarity, r.matched) == (7, pytest.approx(1.0), True)
    r = match_comment([0.0, 0.0, 1.0], {1: np.array([1.0, 0, 0]), 2: np.array([0, 1.0, 0])})
    assert r.cluster == 1 and not r.matched
    r = match_comment([1.0, 1.0], {5: np.array([1.0, 0]), 3: np.array([0, 1.0])})
    assert r.cluster == 3


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10_000), st.floats(0.1, 10))
def test_argmax_invariant_to_centroid_scaling(seed, alpha):
    rng = np.random.default_rng(seed)
    cents = {c: rng.standard_normal(4) for c in range(4)}
    e = rng.standard_normal(4)
    scaled = dict(cents)
    scaled[2] = alpha * cents[2]
    assert match_comment(e, cents).cluster == match_comment(e, scaled).cluster


def test_match_corpus_copies_fully_mapped():
    X = np.array([[1.0, 0, 0], [0.9, 0.1, 0], [0, 0, 1.0]])
    model = TopicModel({0: [0, 1], 1: [2]})
    rep = match_corpus(_comments(3), model, X, comment_embeddings=X)
    assert rep.mapped_fraction == 1.0


def test_empty_comment_list():
    rep = match_corpus([], TopicModel({0: [0]}), np.eye(2))
    assert rep.mapped_fraction == 0.0 and rep.results == []


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10_000))
def test_monotone_and_sweep_consistent(seed):
    rng = np.random.default_rng(seed)
    X = rng.standard_normal((30, 6))
    model = TopicModel({0: list(range(10)), 1: list(range(10, 20)), 2: list(range(20, 30))})
    E = X[rng.integers(0, 30, 40)] + rng.normal(scale=rng.uniform(0.1, 2), size=(40, 6))
    comments = _comments(40)
    taus = [0.4, 0.5, 0.6, 0.7]
    reports = {t: match_corpus(comments, model, X, t, comment_embeddings=E) for t in taus}
    for lo, hi in zip(taus, taus[1:]):
        assert reports[hi].matched_ids() <= reports[lo].matched_ids()
    sweep = sweep_thresholds(comments, model, X, taus, comment_embeddings=E)
    assert sweep == {t: reports[t].mapped_fraction for t in taus}
    assert sweep_thresholds(comments, model, X, [-1.0], comment_embeddings=E)[-1.0] == 1.0
    for t, rep in reports.items():
        for r in rep.results:
            assert r.matched == (r.similarity >= t)


def test_sweep_requires_ascending():
    with pytest.raises(ValueError):
        sweep_thresholds(_comments(1), TopicModel({0: [0]}), np.eye(2), [0.6, 0.4], comment_embeddings=np.eye(2)[:1])


class TestSentenceFilter:
    def test_identical_members_pass(self):
        assert sentence_level_filter([1.0, 0.0], [[1.0, 0.0], [1.0, 0.0]])

    def test_orthogonal_comment_fails(self):
        assert not sentence_level_filter([0.0, 0.0, 1.0], [[1.0, 0.0, 0.0], [0.9, 0.1, 0.0]])

    def test_single_member_uses_threshold(self):
        assert sentence_level_filter([1.0, 0.1], [[1.0, 0.0]], 0.6)
        assert not sentence_level_filter([0.1, 1.0], [[1.0, 0.0]], 0.6)


def _report(authors_of_matches):
    comments = _comments(len(authors_of_matches), authors_of_matches)
    results = [MatchResult(c.comment_id, 0, 0.9, True) for c in comments]
    return MatchReport(results, 0.6, 1.0), comments


class TestUserConcentration:
    def test_single_author(self):
        rep, comments = _report(["a"] * 5)
        uc = user_concentration(rep, comments)
        assert uc.users_for_half == 1 and uc.curve[0] == 1.0

    def test_ten_authors(self):
        rep, comments = _report([f"u{i}" for i in range(10)])
        assert user_concentration(rep, comments).users_for_half == 5

    def test_no_matches(self):
        comments = _comments(2)
        rep = MatchReport([MatchResult(c.comment_id, 0, 0.1, False) for c in comments], 0.6, 0.0)
        with pytest.raises(NoMatches):
            user_concentration(rep, comments)


class TestPrecision:
    def test_nine_of_ten(self):
        rows = [{"topic": 0, "comment_id": f"c{i}", "verdict": "correct" if i else "incorrect"} for i in range(10)]
        score = score_precision(rows)
        assert score.overall == 90.0 and score.per_topic[0] == 90.0

    def test_unlabeled(self):
        with pytest.raises(UnlabeledRows):
            score_precision([])
        with pytest.raises(UnlabeledRows):
            score_precision([{"topic": 0, "verdict": ""}])

    def test_unknown_topic(self):
        with pytest.raises(UnknownTopicInLabels):
            score_precision([{"topic": 5, "verdict": "1"}], known_topics=[0, 1])

    def test_sample_is_seeded(self):
        comments = _comments(60)
        results = [MatchResult(c.comment_id, i % 15, 0.8, i % 4 != 0) for i, c in enumerate(comments)]
        rep = MatchReport(results, 0.6, 0.75)
        a = precision_sample(rep, comments, top_k=3, random_k=4, seed=1)
        b = precision_sample(rep, comments, top_k=3, random_k=4, seed=1)
        assert a == b
        assert len({r["topic"] for r in a}) == 7
        assert all(r["comment_id"] in rep.matched_ids() for r in a)
