"""
Clusters and their keywords
===========================

HDBSCAN groups the reduced coordinates; class-based TF-IDF names each group.
"""

import numpy as np

from narrative_topics.cluster import HdbscanParams, hdbscan, mutual_reachability
from narrative_topics.embed import HashProvider, embed_batch
from narrative_topics.reduce import UmapParams, umap_reduce
from narrative_topics.synthetic import FAMILY_WORDS
from narrative_topics.topics import TermStats, build_topic_model, ctfidf_weights, diversity

# mutual reachability on three points on a line
mr = mutual_reachability(np.array([0.0, 1.0, 3.0]), 2)
print("core distances:", mr.core, "d(0,3) =", mr.distance(0, 2))

# the hand example: nato is frequent in cluster 1 and nowhere else
stats = TermStats.from_counts({1: {"nato": 2, "biden": 1}, 2: {"gas": 1, "biden": 1}})
print("weight(nato, 1) =", round(ctfidf_weights(stats, 1)["nato"], 6), "= 2 ln 2.25")

# three families through the whole topic step
rng = np.random.default_rng(2)
sentences = [" ".join(rng.choice(FAMILY_WORDS[f], size=8, replace=False)) for f in range(3) for _ in range(80)]
X = embed_batch(sentences, HashProvider(seed=4))
coords = umap_reduce(X, UmapParams(seed=5))
labels = hdbscan(coords, HdbscanParams(min_cluster_size=10))
print(f"{labels.K} clusters, {100 * labels.outlier_fraction:.1f}% outliers")

model = build_topic_model(sentences, labels.labels, X)
for c in model.cluster_ids:
    print(c, len(model.cluster_members[c]), [t for t, _ in model.keywords[c][:5]])
print("diversity:", diversity(model))
