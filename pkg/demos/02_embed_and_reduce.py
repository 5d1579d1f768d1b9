"""
Embedding and UMAP
==================

The hash provider turns shared tokens into shared directions, so two token
families land in two groups. UMAP then squeezes 768 dimensions down to 5.
"""

import numpy as np

from narrative_topics.embed import HashProvider, embed_batch
from narrative_topics.reduce import UmapParams, fit_ab, smooth_knn, umap_reduce
from narrative_topics.synthetic import FAMILY_WORDS

rng = np.random.default_rng(0)
texts, family = [], []
for f in (0, 1):
    for _ in range(60):
        texts.append(" ".join(rng.choice(FAMILY_WORDS[f], size=7, replace=False)))
        family.append(f)
family = np.array(family)

X = embed_batch(texts, HashProvider(seed=1))
print("embedding matrix:", X.data.shape, X.provider_id)

# the low-dimensional similarity curve and one bandwidth solve
a, b = fit_ab(0.0, 1.0)
print(f"curve parameters a={a:.3f} b={b:.3f}")
rho, sigma = smooth_knn([1, 2, 2, 2], 4)
print(f"rho={rho} sigma={sigma:.6f} (1/ln 3 = {1 / np.log(3):.6f})")

Y = umap_reduce(X, UmapParams(seed=3))
D = np.linalg.norm(Y[:, None] - Y[None], axis=-1)
same = family[:, None] == family[None, :]
np.fill_diagonal(same, False)
print("coordinates:", Y.shape)
print(f"mean distance within a family {D[same].mean():.2f}, across families {D[family[:, None] != family].mean():.2f}")
