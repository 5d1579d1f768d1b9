import datetime as dt
import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from narrative_topics.corpus import (
    ArticleRecord,
    filter_comments,
    ingest_articles,
    looks_english,
    normalize_domain,
    segment,
    split_sentences,
    write_articles,
)
from narrative_topics.errors import RecordInvalid


def _article(text, url="https://a.example/1", domain="a.example", day=dt.date(2022, 3, 1)):
    return ArticleRecord(url, domain, "t", text, day)


def _write_jsonl(path, records):
    path.write_text("".join(json.dumps(r) + "\n" for r in records), encoding="utf-8")
    return path


RECORDS = [
    {"url": "https://rt.example/a", "domain": "rt.example", "title": "A",
     "text": "Russia invaded. The West reacted?", "published": "2022-02-24"},
    {"url": "https://tass.example/b", "domain": "tass.example", "title": "B",
     "text": "Sanctions followed quickly.", "published": "2022-02-25T10:00:00Z"},
]


class TestIngest:
    def test_two_valid_records(self, tmp_path):
        corpus = ingest_articles(_write_jsonl(tmp_path / "a.jsonl", RECORDS))
        assert len(corpus.articles) == 2
        assert corpus.duplicates == 0

    def test_missing_published_reports_line(self, tmp_path):
        bad = dict(RECORDS[1])
        del bad["published"]
        with pytest.raises(RecordInvalid) as info:
            ingest_articles(_write_jsonl(tmp_path / "a.jsonl", [RECORDS[0], bad]))
        assert info.value.line == 2

    def test_duplicate_url_dropped(self, tmp_path):
        corpus = ingest_articles(_write_jsonl(tmp_path / "a.jsonl", [RECORDS[0], RECORDS[0]]))
        assert len(corpus.articles) == 1
        assert corpus.duplicates == 1

    def test_bad_date_rejected(self, tmp_path):
        bad = dict(RECORDS[0], published="yesterday")
        with pytest.raises(RecordInvalid):
            ingest_articles(_write_jsonl(tmp_path / "a.jsonl", [bad]))

    def test_timestamp_becomes_utc_day(self, tmp_path):
        corpus = ingest_articles(_write_jsonl(tmp_path / "a.jsonl", RECORDS))
        assert corpus.article("https://tass.example/b").published == dt.date(2022, 2, 25)

    def test_sentences_inherit_article_fields(self, tmp_path):
        corpus = ingest_articles(_write_jsonl(tmp_path / "a.jsonl", RECORDS))
        sents = corpus.sentences()
        assert [s.sentence_id for s in sents] == list(range(len(sents)))
        for s in sents:
            art = corpus.article(s.article_url)
            assert (s.domain, s.published) == (art.domain, art.published)

    def test_round_trip_is_bit_identical(self, tmp_path):
        src = _write_jsonl(tmp_path / "a.jsonl", RECORDS)
        first = ingest_articles(src)
        write_articles(first, tmp_path / "b.jsonl")
        second = ingest_articles(tmp_path / "b.jsonl")
        write_articles(second, tmp_path / "c.jsonl")
        assert (tmp_path / "b.jsonl").read_bytes() == (tmp_path / "c.jsonl").read_bytes()
        assert first.articles == second.articles

    def test_domain_normalization(self):
        assert normalize_domain("https://www.RT.com/news/") == "rt.com"


class TestSplit:
    def test_two_sentences(self):
        assert [s.text for s in split_sentences(_article("Russia invaded. The West reacted?"))] == [
            "Russia invaded", "The West reacted"]

    def test_url_removed(self):
        assert [s.text for s in split_sentences(_article("see https://x.example now."))] == ["see now"]

    def test_abbreviation_does_not_split(self):
        out = split_sentences(_article("Dr. Putin spoke."))
        assert len(out) == 1

    def test_start_id(self):
        out = split_sentences(_article("One. Two."), start_id=5)
        assert [s.sentence_id for s in out] == [5, 6]

    @settings(max_examples=200, deadline=None)
    @given(st.lists(st.sampled_from(list("abcdefg .!?,'") + ["Dr. ", "http://x.y/z "]), max_size=60).map("".join))
    def test_split_idempotent(self, text):
        for piece in segment(text):
            assert segment(piece) == [piece]


class TestComments:
    def _raw(self, body, i=0):
        return {"id": f"c{i}", "author": "u", "subreddit": "s", "created_utc": 1600000000, "body": body}

    def test_single_word_dropped(self):
        assert filter_comments([self._raw("no")]) == []

    def test_four_word_comment_kept(self):
        out = filter_comments([self._raw("nato should expand now")])
        assert [c.body for c in out] == ["nato should expand now"]

    def test_cyrillic_dropped(self):
        assert filter_comments([self._raw("НАТО должно расширяться сейчас же")]) == []

    def test_long_comment_needs_stopword(self):
        assert not looks_english("zxq wvb rrt plk mmn qqz")
        assert looks_english("zxq wvb the plk mmn qqz")

    @settings(max_examples=150, deadline=None)
    @given(st.lists(st.lists(st.sampled_from(list("abc xyz.") + ["the ", "ж"]), max_size=30).map("".join),
                    max_size=12),
           st.integers(0, 5))
    def test_filter_subset_and_word_counts(self, bodies, min_words):
        raw = [self._raw(b, i) for i, b in enumerate(bodies)]
        out = filter_comments(raw, min_words=min_words)
        ids = {r["id"] for r in raw}
        assert {c.comment_id for c in out} <= ids
        assert all(len(c.body.split()) > min_words for c in out)
