"""
Significance tests
==================

Mann-Whitney U compares article counts on originated and non-originated
topics; small samples get the exact distribution. Pearson correlations get a
t-test p-value from the incomplete beta function.
"""

import numpy as np

from narrative_topics.stats import mann_whitney_u, pearson

print(mann_whitney_u([1, 2], [3, 4]))  # exact: U = 0, p = 1/3

rng = np.random.default_rng(0)
origin = rng.poisson(5, size=40)
other = rng.poisson(3, size=60)
res = mann_whitney_u(origin, other)
print(f"U={res.statistic:.1f} p={res.p_value:.2e} via {res.method}; significant at 0.005: {res.significant(0.005)}")

print(pearson([1, 2, 3, 4], [2, 1, 4, 3]))  # r = 0.6, p = 0.4
