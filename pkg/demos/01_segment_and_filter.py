"""
Sentences and comments
======================

Articles are cut into sentences before anything else happens. Comments are
kept only when they look like English and carry more than three words.
"""

import datetime as dt

from narrative_topics.corpus import ArticleRecord, filter_comments, split_sentences

# one article, with an abbreviation and a link that should both be harmless
article = ArticleRecord(
    url="https://news.example/1",
    domain="news.example",
    title="Talks",
    text="Dr. Lavrov met the U.S. envoy. Sanctions were discussed, see https://x.example/a now! "
         "Nothing was agreed?",
    published=dt.date(2022, 2, 1),
)
for s in split_sentences(article):
    print(s.sentence_id, "|", s.text)

# comments: too short, not English, and two keepers
raw = [
    {"id": "a", "author": "u1", "subreddit": "worldnews", "created_utc": 1643700000, "body": "no"},
    {"id": "b", "author": "u2", "subreddit": "worldnews", "created_utc": 1643700100,
     "body": "НАТО должно расширяться сейчас же"},
    {"id": "c", "author": "u3", "subreddit": "worldnews", "created_utc": 1643700200,
     "body": "nato should expand now"},
    {"id": "d", "author": "u4", "subreddit": "europe", "created_utc": 1643700300,
     "body": "the sanctions will not change anything at all"},
]
kept = filter_comments(raw)
print("kept comments:", [c.comment_id for c in kept])
