"""
Who said it first, and who repeated it
======================================

A domain originates a topic when it published the topic on the first day
the topic shows up. The spread graph links originators to domains that wrote
about the topic later.
"""

import datetime as dt

import numpy as np

from narrative_topics.analytics import assign_origins, build_spread_graph
from narrative_topics.corpus import ArticleRecord, Corpus
from narrative_topics.synthetic import make_corpus
from narrative_topics.topics import build_topic_model

syn = make_corpus(seed=0)
articles = [
    ArticleRecord(a["url"], a["domain"], a["title"], a["text"], dt.date.fromisoformat(a["published"]))
    for a in syn.articles
]
corpus = Corpus(sorted(articles, key=lambda a: (a.published, a.url)))
sentences = corpus.sentences()
labels = np.array([syn.sentence_family[s.text.lower()] for s in sentences])
model = build_topic_model(sentences, labels)

report = assign_origins(model, corpus)
for t, o in sorted(report.topics.items()):
    print(f"topic {t}: first seen {o.first_day}, originated by {', '.join(o.originators)}, "
          f"reached {o.spread} other domains through {o.external_articles} articles")

for d, rec in sorted(report.domains.items()):
    print(f"{d:18s} origin topics {rec.origin_topic_count}  spread CDF {rec.spread_cdf[:4]}")

graph = build_spread_graph(report)
print(graph.to_dot())
