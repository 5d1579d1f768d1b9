"""
Matching comments to narratives
===============================

Every comment is compared with each cluster's mean sentence embedding. The
closest cluster wins; the comment counts as a match when the cosine clears
the threshold.
"""

import numpy as np

from narrative_topics.corpus import filter_comments
from narrative_topics.embed import HashProvider, embed_batch
from narrative_topics.match import match_corpus, sweep_thresholds, user_concentration
from narrative_topics.synthetic import make_corpus
from narrative_topics.topics import build_topic_model

syn = make_corpus(n_comments=120, seed=3)
sentences = list(syn.sentence_family)
truth = np.array([syn.sentence_family[s] for s in sentences])

# skip clustering here and use the planted families as labels
provider = HashProvider(seed=9)
X = embed_batch(sentences, provider)
model = build_topic_model(sentences, truth, X)
comments = filter_comments(syn.comments)

report = match_corpus(comments, model, X, threshold=0.6, provider=provider)
print(f"matched {report.matched_count} of {len(comments)} comments")
print("per cluster:", report.per_cluster_counts)
print("per community:", report.per_community_counts)

print("threshold sweep:", sweep_thresholds(comments, model, X, provider=provider))

uc = user_concentration(report, comments)
print(f"{uc.users_for_half} of {uc.n_authors} authors write half of the matched comments")
