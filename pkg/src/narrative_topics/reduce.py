"""UMAP dimensionality reduction written out stage by stage.

The pipeline is: exact cosine kNN -> per-point bandwidth calibration ->
fuzzy union of the directed membership graph -> fit of the low-dimensional
similarity curve -> seeded SGD layout with negative sampling.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numba
import numpy as np
import scipy.sparse
from scipy.optimize import curve_fit

from .embed import EmbeddingMatrix
from .errors import FitDiverged, KTooLarge

SMOOTH_K_ITER = 64
SIGMA_MIN = 1e-8
SIGMA_MAX = 1e8


@dataclass(frozen=True)
class UmapParams:
    n_neighbors: int = 15
    n_components: int = 5
    min_dist: float = 0.0
    spread: float = 1.0
    metric: str = "cosine"
    n_epochs: int = 200
    negative_sample_rate: int = 5
    seed: int = 42

    def validate(self, n_points=None):
        if self.metric != "cosine":
            raise ValueError("only the cosine metric is supported")
        if self.n_neighbors < 2:
            raise ValueError("n_neighbors must be >= 2")
        if n_points is not None and self.n_neighbors >= n_points:
            raise KTooLarge(f"n_neighbors={self.n_neighbors} needs more than {n_points} points")
        if self.n_components < 1:
            raise ValueError("n_components must be >= 1")
        if self.min_dist < 0:
            raise ValueError("min_dist must be >= 0")
        if self.spread <= 0:
            raise ValueError("spread must be > 0")
        if self.n_epochs < 0 or self.negative_sample_rate < 0:
            raise ValueError("n_epochs and negative_sample_rate must be >= 0")


@dataclass
class FuzzyGraph:
    """Symmetric weighted graph stored as COO triples (both directions present)."""

    head: np.ndarray
    tail: np.ndarray
    weight: np.ndarray
    n_points: int
    rho: np.ndarray | None = None
    sigma: np.ndarray | None = None

    def to_sparse(self) -> scipy.sparse.csr_matrix:
        return scipy.sparse.csr_matrix(
            (self.weight, (self.head, self.tail)), shape=(self.n_points, self.n_points)
        )

    def __len__(self):
        return len(self.weight)


# ---------------------------------------------------------------------------
# kNN
# ---------------------------------------------------------------------------


def _as_array(X) -> np.ndarray:
    if isinstance(X, EmbeddingMatrix):
        X = X.data
    return np.asarray(X, dtype=np.float64)


def knn_graph(X, k: int, metric: str = "cosine", block_size: int = 2048):
    """Exact k nearest neighbours under cosine distance ``1 - cos``.

    Returns ``(indices, distances)``, both of shape ``(rows, k)``; each row is
    ascending in distance with ties going to the lower index, self excluded.
    """
    if metric != "cosine":
        raise ValueError("only the cosine metric is supported")
    data = _as_array(X)
    n = data.shape[0]
    if n < 2:
        raise KTooLarge("need at least two points")
    if k >= n:
        raise KTooLarge(f"k={k} must be smaller than the number of points ({n})")
    if k < 1:
        raise ValueError("k must be >= 1")
    norms = np.linalg.norm(data, axis=1, keepdims=True)
    norms[norms == 0] = 1.0
    unit = data / norms

    indices = np.empty((n, k), dtype=np.int64)
    distances = np.empty((n, k), dtype=np.float64)
    for start in range(0, n, block_size):
        stop = min(start + block_size, n)
        d = 1.0 - unit[start:stop] @ unit.T
        d[d < 1e-12] = 0.0
        rows = np.arange(stop - start)
        d[rows, np.arange(start, stop)] = np.inf
        # stable sort keeps lower column index first among equal distances
        order = np.argsort(d, axis=1, kind="stable")[:, :k]
        indices[start:stop] = order
        distances[start:stop] = np.take_along_axis(d, order, axis=1)
    return indices, distances


# ---------------------------------------------------------------------------
# fuzzy simplicial set
# ---------------------------------------------------------------------------


def _smooth_knn_rows(distances: np.ndarray):
    d = np.asarray(distances, dtype=np.float64)
    k = d.shape[1]
    target = math.log2(k)
    rho = d[:, 0].copy()
    excess = np.maximum(d - rho[:, None], 0.0)

    def total(sig):
        return np.exp(-excess / sig[:, None]).sum(axis=1)

    lo = np.full(d.shape[0], SIGMA_MIN)
    hi = np.full(d.shape[0], SIGMA_MAX)
    at_lo = total(lo) >= target
    at_hi = total(hi) < target
    for _ in range(SMOOTH_K_ITER):
        mid = 0.5 * (lo + hi)
        over = total(mid) > target
        hi = np.where(over, mid, hi)
        lo = np.where(over, lo, mid)
    sigma = 0.5 * (lo + hi)
    sigma[at_lo] = SIGMA_MIN
    sigma[at_hi] = SIGMA_MAX
    return rho, sigma


def smooth_knn(distances, k: int | None = None):
    """Return ``(rho, sigma)`` for one point's ascending neighbour distances.

    ``sigma`` solves ``sum(exp(-max(0, d - rho) / sigma)) == log2(k)`` by
    bisection, clamped to ``[1e-8, 1e8]`` when no finite solution exists.
    """
    d = np.asarray(distances, dtype=np.float64).ravel()
    if k is None:
        k = d.shape[0]
    if k < 2 or d.shape[0] != k:
        raise ValueError("need k >= 2 distances")
    rho, sigma = _smooth_knn_rows(d[None, :])
    return float(rho[0]), float(sigma[0])


def membership_strengths(indices, distances, rho, sigma) -> scipy.sparse.csr_matrix:
    """Directed membership ``P[i, j] = exp(-max(0, d_ij - rho_i) / sigma_i)``."""
    n, k = indices.shape
    vals = np.exp(-np.maximum(distances - rho[:, None], 0.0) / sigma[:, None])
    rows = np.repeat(np.arange(n), k)
    P = scipy.sparse.csr_matrix((vals.ravel(), (rows, indices.ravel())), shape=(n, n))
    P.eliminate_zeros()
    return P


def fuzzy_union(P, rho=None, sigma=None) -> FuzzyGraph:
    """Symmetrize with the probabilistic t-conorm ``P + P^T - P * P^T``."""
    if not scipy.sparse.issparse(P):
        P = scipy.sparse.csr_matrix(np.asarray(P, dtype=np.float64))
    P = P.tocsr().astype(np.float64)
    P.setdiag(0.0)
    P.eliminate_zeros()
    Pt = P.T.tocsr()
    # a + b - ab written as hi + (lo - lo*hi): symmetric bit for bit, and exactly 1 when either side is 1
    hi = P.maximum(Pt)
    lo = P.minimum(Pt)
    W = (hi + (lo - lo.multiply(hi))).tocoo()
    keep = W.data > 0
    order = np.lexsort((W.col[keep], W.row[keep]))
    return FuzzyGraph(
        head=W.row[keep][order].astype(np.int64),
        tail=W.col[keep][order].astype(np.int64),
        weight=np.minimum(W.data[keep][order], 1.0),
        n_points=P.shape[0],
        rho=rho,
        sigma=sigma,
    )


# ---------------------------------------------------------------------------
# low-dimensional curve
# ---------------------------------------------------------------------------


def target_curve(d, min_dist: float, spread: float):
    d = np.asarray(d, dtype=np.float64)
    return np.where(d <= min_dist, 1.0, np.exp(-(d - min_dist) / spread))


def _curve(d, a, b):
    return 1.0 / (1.0 + a * d ** (2 * b))


def fit_ab(min_dist: float, spread: float, return_error: bool = False):
    """Least-squares ``(a, b)`` so that ``1 / (1 + a d^2b)`` tracks the target curve."""
    if spread <= 0:
        raise ValueError("spread must be > 0")
    xv = np.linspace(0.0, spread * 3.0, 300)
    yv = target_curve(xv, min_dist, spread)
    (a, b), _ = curve_fit(_curve, xv, yv, p0=(1.0, 1.0), maxfev=10000)
    err = float(np.max(np.abs(_curve(xv, a, b) - yv)))
    if not np.isfinite(err) or err > 0.1:
        raise FitDiverged(f"curve fit residual {err:.3g} exceeds 0.1")
    if return_error:
        return float(a), float(b), err
    return float(a), float(b)


# ---------------------------------------------------------------------------
# layout
# ---------------------------------------------------------------------------


@numba.njit(cache=True)
def _clip(v):
    if v > 4.0:
        return 4.0
    if v < -4.0:
        return -4.0
    return v


@numba.njit(cache=True)
def _sgd_epochs(emb, head, tail, epochs_per_sample, n_epochs, a, b, neg_rate, seed):
    np.random.seed(seed)
    n_vertices, dim = emb.shape
    n_edges = head.shape[0]
    epochs_per_neg = epochs_per_sample / neg_rate
    next_sample = epochs_per_sample.copy()
    next_neg = epochs_per_neg.copy()
    for epoch in range(n_epochs):
        alpha = 1.0 - epoch / n_epochs
        for i in range(n_edges):
            if next_sample[i] > epoch:
                continue
            j = head[i]
            k = tail[i]
            d2 = 0.0
            for c in range(dim):
                diff = emb[j, c] - emb[k, c]
                d2 += diff * diff
            if d2 > 0.0:
                coeff = -2.0 * a * b * d2 ** (b - 1.0) / (a * d2**b + 1.0)
            else:
                coeff = 0.0
            for c in range(dim):
                g = _clip(coeff * (emb[j, c] - emb[k, c])) * alpha
                emb[j, c] += g
                emb[k, c] -= g
            next_sample[i] += epochs_per_sample[i]

            n_neg = int((epoch - next_neg[i]) / epochs_per_neg[i])
            for _ in range(n_neg):
                k = np.random.randint(n_vertices)
                if k == j:
                    continue
                d2 = 0.0
                for c in range(dim):
                    diff = emb[j, c] - emb[k, c]
                    d2 += diff * diff
                if d2 > 0.0:
                    coeff = 2.0 * b / ((0.001 + d2) * (a * d2**b + 1.0))
                    for c in range(dim):
                        emb[j, c] += _clip(coeff * (emb[j, c] - emb[k, c])) * alpha
            next_neg[i] += n_neg * epochs_per_neg[i]
    return emb


def initial_layout(n_points: int, n_components: int, seed: int) -> np.ndarray:
    rng = np.random.default_rng(seed)
    return rng.uniform(-10.0, 10.0, size=(n_points, n_components))


def optimize_layout(graph: FuzzyGraph, params: UmapParams, a=None, b=None) -> np.ndarray:
    """Seeded single-sequence SGD over the fuzzy graph's edges."""
    if a is None or b is None:
        a, b = fit_ab(params.min_dist, params.spread)
    emb = initial_layout(graph.n_points, params.n_components, params.seed)
    if len(graph) == 0 or params.n_epochs == 0:
        return emb
    w = graph.weight
    keep = w >= w.max() / params.n_epochs
    head = np.ascontiguousarray(graph.head[keep], dtype=np.int64)
    tail = np.ascontiguousarray(graph.tail[keep], dtype=np.int64)
    eps = w.max() / w[keep]
    neg_rate = max(int(params.negative_sample_rate), 0)
    if neg_rate == 0:
        # an infinite interval means negatives are never drawn
        neg_rate_f = 1e-300
    else:
        neg_rate_f = float(neg_rate)
    seed32 = int(params.seed) % (2**32)
    emb = _sgd_epochs(emb, head, tail, eps, int(params.n_epochs), float(a), float(b), neg_rate_f, seed32)
    if not np.all(np.isfinite(emb)):
        raise FloatingPointError("layout produced non-finite coordinates")
    return emb


def build_fuzzy_graph(X, n_neighbors: int) -> FuzzyGraph:
    indices, distances = knn_graph(X, n_neighbors)
    rho, sigma = _smooth_knn_rows(distances)
    P = membership_strengths(indices, distances, rho, sigma)
    return fuzzy_union(P, rho=rho, sigma=sigma)


def umap_reduce(X, params: UmapParams | None = None) -> np.ndarray:
    """Reduce ``X`` (rows x dim) to ``rows x params.n_components`` coordinates."""
    params = params or UmapParams()
    data = _as_array(X)
    params.validate(data.shape[0])
    graph = build_fuzzy_graph(data, params.n_neighbors)
    a, b = fit_ab(params.min_dist, params.spread)
    return optimize_layout(graph, params, a, b)


def write_coordinates(path, coords, row_keys=None) -> None:
    coords = np.asarray(coords)
    keys = row_keys if row_keys is not None else range(coords.shape[0])
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["row_key"] + [f"c{i + 1}" for i in range(coords.shape[1])])
        for key, row in zip(keys, coords):
            writer.writerow([key] + [repr(float(v)) for v in row])


def read_coordinates(path):
    keys, rows = [], []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        next(reader)
        for rec in reader:
            keys.append(rec[0])
            rows.append([float(v) for v in rec[1:]])
    return keys, np.asarray(rows, dtype=np.float64)
