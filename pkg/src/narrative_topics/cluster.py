"""HDBSCAN over reduced coordinates.

Mutual reachability distances feed Prim's MST; the MST becomes a single
linkage dendrogram, which is condensed by ``min_cluster_size`` and cut by
excess of mass.
"""

from __future__ import annotations

import csv
from collections import deque
from dataclasses import dataclass

import numpy as np

from .errors import TooFewPoints


@dataclass(frozen=True)
class HdbscanParams:
    min_cluster_size: int = 10
    min_samples: int | None = None
    metric: str = "euclidean"
    selection: str = "eom"

    def __post_init__(self):
        if self.min_cluster_size < 2:
            raise ValueError("min_cluster_size must be >= 2")
        if self.min_samples is not None and self.min_samples < 1:
            raise ValueError("min_samples must be >= 1")
        if self.metric != "euclidean":
            raise ValueError("only the euclidean metric is supported")
        if self.selection not in ("eom", "excess_of_mass"):
            raise ValueError("only excess-of-mass selection is supported")

    @property
    def effective_min_samples(self) -> int:
        return self.min_samples if self.min_samples is not None else self.min_cluster_size


@dataclass
class ClusterLabels:
    labels: np.ndarray
    probabilities: np.ndarray

    @property
    def K(self) -> int:
        return int(self.labels.max()) + 1 if self.labels.size else 0

    @property
    def outlier_fraction(self) -> float:
        return float(np.mean(self.labels == -1)) if self.labels.size else 0.0


class MutualReachability:
    """Lazy accessor for ``max(core(a), core(b), |a - b|)``."""

    def __init__(self, X, core):
        self.X = X
        self.core = core
        self.n = X.shape[0]

    def distance(self, a: int, b: int) -> float:
        d = float(np.sqrt(np.sum((self.X[a] - self.X[b]) ** 2)))
        return max(self.core[a], self.core[b], d)

    __call__ = distance

    def row(self, a: int) -> np.ndarray:
        d = np.sqrt(np.sum((self.X - self.X[a]) ** 2, axis=1))
        return np.maximum(np.maximum(d, self.core), self.core[a])

    def matrix(self) -> np.ndarray:
        return np.vstack([self.row(i) for i in range(self.n)])


def core_distances(X, min_samples: int) -> np.ndarray:
    """Distance to the ``min_samples``-th nearest point, the point itself counting as first."""
    X = np.asarray(X, dtype=np.float64)
    n = X.shape[0]
    if min_samples < 1:
        raise ValueError("min_samples must be >= 1")
    if min_samples > n:
        raise TooFewPoints(f"min_samples={min_samples} exceeds the {n} available points")
    if min_samples == 1:
        return np.zeros(n)
    core = np.empty(n)
    kth = min_samples - 1
    block_size = max(1, (1 << 22) // max(1, n * X.shape[1]))
    for start in range(0, n, block_size):
        block = X[start : start + block_size]
        d = np.sqrt(((block[:, None, :] - X[None, :, :]) ** 2).sum(axis=2))
        core[start : start + block.shape[0]] = np.partition(d, kth, axis=1)[:, kth]
    return core


def mutual_reachability(X, min_samples: int) -> MutualReachability:
    X = np.asarray(X, dtype=np.float64)
    if X.ndim == 1:
        X = X[:, None]
    return MutualReachability(X, core_distances(X, min_samples))


def mst(dist, n: int | None = None) -> np.ndarray:
    """Prim's minimum spanning tree.

    ``dist`` is a :class:`MutualReachability`, a dense ``n x n`` matrix, or a
    callable ``dist(i, j)``. Returns an ``(n - 1, 3)`` array of
    ``(u, v, weight)`` rows in the order vertices joined the tree.
    """
    if isinstance(dist, MutualReachability):
        n = dist.n
        row = dist.row
    elif callable(dist):
        if n is None:
            raise ValueError("n is required with a callable distance")
        f = dist
        row = lambda i: np.array([f(i, j) if j != i else 0.0 for j in range(n)])  # noqa: E731
    else:
        mat = np.asarray(dist, dtype=np.float64)
        n = mat.shape[0]
        row = lambda i: mat[i]  # noqa: E731
    if n <= 1:
        return np.empty((0, 3))

    in_tree = np.zeros(n, dtype=bool)
    best = np.full(n, np.inf)
    source = np.full(n, -1, dtype=np.int64)
    edges = np.empty((n - 1, 3))
    current = 0
    in_tree[0] = True
    for step in range(n - 1):
        d = row(current)
        better = (~in_tree) & ((d < best) | ((d == best) & (current < source)))
        best[better] = d[better]
        source[better] = current
        cand = np.where(in_tree, np.inf, best)
        nxt = int(np.argmin(cand))  # argmin returns the lowest index among ties
        edges[step] = (source[nxt], nxt, best[nxt])
        in_tree[nxt] = True
        current = nxt
    return edges


# ---------------------------------------------------------------------------
# dendrogram and condensed tree
# ---------------------------------------------------------------------------


def single_linkage(mst_edges: np.ndarray, n: int) -> np.ndarray:
    """Scipy-style linkage rows ``(left, right, distance, size)`` from MST edges."""
    edges = np.asarray(mst_edges, dtype=np.float64).reshape(-1, 3)
    lo = np.minimum(edges[:, 0], edges[:, 1])
    order = np.lexsort((lo, edges[:, 2]))
    edges = edges[order]

    parent = np.arange(2 * n - 1)
    size = np.ones(2 * n - 1, dtype=np.int64)

    def find(x):
        root = x
        while parent[root] != root:
            root = parent[root]
        while parent[x] != root:
            parent[x], x = root, parent[x]
        return root

    out = np.empty((n - 1, 4))
    for i, (u, v, w) in enumerate(edges):
        ru, rv = find(int(u)), find(int(v))
        new = n + i
        parent[ru] = parent[rv] = new
        size[new] = size[ru] + size[rv]
        out[i] = (ru, rv, w, size[new])
    return out


def _lambda(dist: float) -> float:
    return 1.0 / dist if dist > 0 else np.inf


def condense_tree(linkage: np.ndarray, n: int, min_cluster_size: int):
    """Condensed tree rows ``(parent, child, lambda, child_size)``.

    Cluster labels start at ``n`` (the root). A child id below ``n`` is a point.
    """
    root = 2 * n - 2
    left = linkage[:, 0].astype(np.int64)
    right = linkage[:, 1].astype(np.int64)
    dist = linkage[:, 2]
    sizes = linkage[:, 3].astype(np.int64)

    def node_size(node):
        return 1 if node < n else int(sizes[node - n])

    def leaves(node):
        stack, pts = [node], []
        while stack:
            x = stack.pop()
            if x < n:
                pts.append(x)
            else:
                stack.extend((right[x - n], left[x - n]))
        return sorted(pts)

    relabel = {root: n}
    next_label = n + 1
    rows = []
    queue = deque([root])
    while queue:
        node = queue.popleft()
        if node < n:
            continue
        i = node - n
        lam = _lambda(dist[i])
        l, r = int(left[i]), int(right[i])
        ls, rs = node_size(l), node_size(r)
        parent = relabel[node]
        if ls >= min_cluster_size and rs >= min_cluster_size:
            for child, cs in ((l, ls), (r, rs)):
                relabel[child] = next_label
                rows.append((parent, next_label, lam, cs))
                next_label += 1
                queue.append(child)
        else:
            for child, cs in ((l, ls), (r, rs)):
                if cs >= min_cluster_size:
                    relabel[child] = parent
                    queue.append(child)
                else:
                    for p in leaves(child):
                        rows.append((parent, p, lam, 1))
    dtype = [("parent", np.int64), ("child", np.int64), ("lambda_val", np.float64), ("child_size", np.int64)]
    return np.array(rows, dtype=dtype)


def _finite_lambdas(tree) -> np.ndarray:
    lam = tree["lambda_val"].copy()
    finite = lam[np.isfinite(lam)]
    cap = 2.0 * finite.max() if finite.size and finite.max() > 0 else 1.0
    lam[~np.isfinite(lam)] = cap
    return lam


def compute_stability(tree, n: int) -> dict[int, float]:
    """``sum(child_size * (lambda - lambda_birth))`` per condensed cluster."""
    lam = _finite_lambdas(tree)
    birth = {n: 0.0}
    for row, lv in zip(tree, lam):
        if row["child"] >= n:
            birth[int(row["child"])] = lv
    stability = {c: 0.0 for c in birth}
    for row, lv in zip(tree, lam):
        p = int(row["parent"])
        stability[p] += (lv - birth[p]) * row["child_size"]
    return stability


def condense_and_extract(mst_edges, params: HdbscanParams, n: int | None = None) -> ClusterLabels:
    """Build the hierarchy from MST edges and extract flat clusters by excess of mass."""
    edges = np.asarray(mst_edges, dtype=np.float64).reshape(-1, 3)
    if n is None:
        n = edges.shape[0] + 1
    mcs = params.min_cluster_size
    labels = np.full(n, -1, dtype=np.int64)
    probs = np.zeros(n)
    if n < 2 or mcs > n:
        return ClusterLabels(labels, probs)

    tree = condense_tree(single_linkage(edges, n), n, mcs)
    lam = _finite_lambdas(tree)
    stability = compute_stability(tree, n)
    is_cluster_row = tree["child"] >= n
    children: dict[int, list[int]] = {c: [] for c in stability}
    for row in tree[is_cluster_row]:
        children[int(row["parent"])].append(int(row["child"]))

    point_parent = np.full(n, -1, dtype=np.int64)
    point_lambda = np.zeros(n)
    for row, lv in zip(tree, lam):
        if row["child"] < n:
            point_parent[row["child"]] = row["parent"]
            point_lambda[row["child"]] = lv

    root = n
    if not children[root]:
        # the hierarchy never splits; only a single density level with no
        # point shed on the way (e.g. all duplicates) counts as one cluster
        if np.all(point_lambda >= point_lambda.max()):
            labels[:] = 0
            probs[:] = 1.0
        return ClusterLabels(labels, probs)

    selected = {c: True for c in stability if c != root}
    subtree = dict(stability)
    for c in sorted(stability, reverse=True):
        if c == root:
            continue
        kids = children[c]
        if not kids:
            continue
        child_total = sum(subtree[k] for k in kids)
        if subtree[c] >= child_total:
            stack = list(kids)
            while stack:
                x = stack.pop()
                selected[x] = False
                stack.extend(children[x])
        else:
            selected[c] = False
            subtree[c] = child_total
    chosen = sorted(c for c, keep in selected.items() if keep)
    label_of = {c: i for i, c in enumerate(chosen)}

    parent_of = {int(r["child"]): int(r["parent"]) for r in tree[is_cluster_row]}
    owner: dict[int, int] = {}

    def selected_ancestor(c):
        if c in owner:
            return owner[c]
        path = []
        x = c
        result = -1
        while True:
            if x in owner:
                result = owner[x]
                break
            if x in label_of:
                result = x
                break
            path.append(x)
            if x == root:
                break
            x = parent_of[x]
        for p in path:
            owner[p] = result
        return result

    for p in range(n):
        c = selected_ancestor(int(point_parent[p]))
        if c >= 0:
            labels[p] = label_of[c]
    # a cluster's lambda_max is the densest level at which anything leaves it
    for k, c in enumerate(chosen):
        members = labels == k
        lmax = lam[tree["parent"] == c].max()
        probs[members] = np.minimum(point_lambda[members], lmax) / lmax
    return ClusterLabels(labels, probs)


def hdbscan(X, params: HdbscanParams | None = None) -> ClusterLabels:
    params = params or HdbscanParams()
    X = np.asarray(X, dtype=np.float64)
    if X.ndim == 1:
        X = X[:, None]
    n = X.shape[0]
    if n < params.min_cluster_size:
        raise TooFewPoints(f"{n} points cannot hold a cluster of {params.min_cluster_size}")
    mr = mutual_reachability(X, params.effective_min_samples)
    return condense_and_extract(mst(mr), params, n=n)


def write_labels(path, result: ClusterLabels, row_keys=None) -> None:
    keys = row_keys if row_keys is not None else range(len(result.labels))
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["row_key", "label", "probability"])
        for key, lab, p in zip(keys, result.labels, result.probabilities):
            writer.writerow([key, int(lab), f"{float(p):.6g}"])


def read_labels(path):
    keys, labels, probs = [], [], []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        for rec in reader:
            keys.append(rec["row_key"])
            labels.append(int(rec["label"]))
            probs.append(float(rec["probability"]))
    return keys, ClusterLabels(np.asarray(labels, dtype=np.int64), np.asarray(probs))
