import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from sklearn.cluster import HDBSCAN
from sklearn.metrics import adjusted_rand_score

from narrative_topics.cluster import (
    HdbscanParams,
    condense_and_extract,
    core_distances,
    hdbscan,
    mst,
    mutual_reachability,
)
from narrative_topics.errors import TooFewPoints

from oracles import brute_force_mst_weight


def blobs(seed=0, n=30, dim=5, sep=10.0):
    rng = np.random.default_rng(seed)
    a = rng.standard_normal((n, dim))
    b = rng.standard_normal((n, dim))
    b[:, 0] += sep
    return np.vstack([a, b]), np.repeat([0, 1], n)


class TestMutualReachability:
    def test_three_points(self):
        mr = mutual_reachability(np.array([0.0, 1.0, 3.0]), 2)
        assert mr.core.tolist() == [1.0, 1.0, 2.0]
        assert mr.distance(0, 1) == 1.0
        assert mr.distance(1, 2) == 2.0
        assert mr.distance(0, 2) == 3.0

    def test_min_samples_one_is_plain_distance(self):
        X = np.random.default_rng(0).standard_normal((10, 3))
        mr = mutual_reachability(X, 1)
        assert np.all(mr.core == 0)
        D = np.linalg.norm(X[:, None] - X[None], axis=-1)
        assert np.allclose(mr.matrix(), D)

    def test_duplicates_have_zero_core(self):
        assert core_distances(np.array([[1.0], [1.0], [5.0]]), 2)[:2].tolist() == [0.0, 0.0]

    @settings(max_examples=50, deadline=None)
    @given(st.integers(0, 10_000), st.integers(1, 6))
    def test_bounds(self, seed, k):
        X = np.random.default_rng(seed).standard_normal((12, 3))
        mr = mutual_reachability(X, k)
        M = mr.matrix()
        D = np.linalg.norm(X[:, None] - X[None], axis=-1)
        off = ~np.eye(12, dtype=bool)
        assert np.all(M[off] >= D[off])
        assert np.all(M[off] >= np.maximum.outer(mr.core, mr.core)[off])


class TestMst:
    def test_triangle(self):
        W = np.array([[0, 1, 3], [1, 0, 2], [3, 2, 0]], dtype=float)
        assert mst(W)[:, 2].sum() == 3.0

    def test_single_point(self):
        assert mst(np.zeros((1, 1))).shape == (0, 3)

    def test_callable_accessor(self):
        W = np.array([[0, 4, 1], [4, 0, 2], [1, 2, 0]], dtype=float)
        assert mst(lambda i, j: W[i, j], n=3)[:, 2].sum() == 3.0

    @settings(max_examples=40, deadline=None)
    @given(st.integers(2, 7), st.integers(0, 10_000))
    def test_brute_force(self, n, seed):
        rng = np.random.default_rng(seed)
        W = rng.integers(1, 20, size=(n, n)).astype(float)
        W = np.triu(W, 1)
        W = W + W.T
        edges = mst(W)
        assert len(edges) == n - 1
        assert edges[:, 2].sum() == brute_force_mst_weight(W)


class TestExtraction:
    def test_blobs(self):
        X, truth = blobs()
        res = hdbscan(X, HdbscanParams(min_cluster_size=10))
        assert res.K == 2
        assert adjusted_rand_score(truth, res.labels) == 1.0
        assert np.all(res.labels >= 0)

    def test_min_cluster_size_above_n(self):
        X = np.random.default_rng(0).standard_normal((8, 2))
        edges = mst(mutual_reachability(X, 2))
        res = condense_and_extract(edges, HdbscanParams(min_cluster_size=9, min_samples=2), n=8)
        assert np.all(res.labels == -1)
        with pytest.raises(TooFewPoints):
            hdbscan(X, HdbscanParams(min_cluster_size=9))

    def test_identical_points(self):
        res = hdbscan(np.ones((20, 3)), HdbscanParams(min_cluster_size=5))
        assert res.K == 1
        assert np.all(res.probabilities == 1.0)

    def test_uniform_noise_mostly_outliers(self):
        X = np.random.default_rng(7).uniform(size=(100, 5))
        res = hdbscan(X, HdbscanParams(min_cluster_size=50))
        assert res.outlier_fraction > 0.5

    def test_deterministic(self):
        X, _ = blobs(3)
        a = hdbscan(X, HdbscanParams(10))
        b = hdbscan(X, HdbscanParams(10))
        assert np.array_equal(a.labels, b.labels)

    @settings(max_examples=25, deadline=None)
    @given(st.integers(0, 10_000), st.integers(3, 12))
    def test_output_invariants(self, seed, mcs):
        rng = np.random.default_rng(seed)
        X = np.vstack([rng.standard_normal((25, 3)), rng.standard_normal((25, 3)) + 6])
        res = hdbscan(X, HdbscanParams(min_cluster_size=mcs))
        labels = res.labels
        assert set(labels.tolist()) <= {-1} | set(range(res.K))
        for c in range(res.K):
            assert np.sum(labels == c) >= mcs
        assert np.all(res.probabilities[labels == -1] == 0)
        assert np.all((res.probabilities >= 0) & (res.probabilities <= 1))

    @settings(max_examples=25, deadline=None)
    @given(st.integers(0, 10_000))
    def test_row_permutation_equivariance(self, seed):
        rng = np.random.default_rng(seed)
        X, _ = blobs(seed % 97)
        X = X + rng.uniform(-0.5, 0.5, X.shape)
        perm = rng.permutation(len(X))
        a = hdbscan(X, HdbscanParams(10))
        b = hdbscan(X[perm], HdbscanParams(10))
        assert adjusted_rand_score(a.labels[perm], b.labels) == 1.0
        assert np.array_equal(a.labels[perm] == -1, b.labels == -1)

    @pytest.mark.parametrize("seed", range(20))
    def test_agrees_with_sklearn(self, seed):
        rng = np.random.default_rng(seed)
        centers = rng.uniform(-8, 8, size=(3, 4))
        X = np.vstack([c + rng.standard_normal((int(rng.integers(15, 40)), 4)) for c in centers])
        X = np.vstack([X, rng.uniform(-12, 12, size=(10, 4))])
        ours = hdbscan(X, HdbscanParams(min_cluster_size=8, min_samples=1))
        ref = HDBSCAN(min_cluster_size=8, min_samples=1, copy=True).fit(X)
        assert adjusted_rand_score(ref.labels_, ours.labels) == 1.0
        assert np.array_equal(ref.labels_ == -1, ours.labels == -1)
        assert np.allclose(ref.probabilities_, ours.probabilities, atol=1e-12)
