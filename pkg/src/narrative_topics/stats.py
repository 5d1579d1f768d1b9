"""Mann-Whitney U and Pearson correlation with self-contained p-values."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import TooFewPoints, ZeroVariance

EXACT_MAX_N = 12
BETACF_MAX_ITER = 200
BETACF_TOL = 1e-12


@dataclass(frozen=True)
class StatResult:
    statistic: float
    p_value: float
    n: int
    m: int
    method: str = ""
    degenerate: bool = False

    def significant(self, alpha: float) -> bool:
        return self.p_value <= alpha


def rank_average(values) -> np.ndarray:
    """1-based ranks with ties sharing the mean of their positions."""
    x = np.asarray(values, dtype=np.float64)
    order = np.argsort(x, kind="mergesort")
    ranks = np.empty(len(x))
    sx = x[order]
    i = 0
    while i < len(x):
        j = i
        while j + 1 < len(x) and sx[j + 1] == sx[i]:
            j += 1
        ranks[order[i : j + 1]] = 0.5 * (i + j) + 1.0
        i = j + 1
    return ranks


def _tie_term(values) -> float:
    _, counts = np.unique(np.asarray(values, dtype=np.float64), return_counts=True)
    return float(np.sum(counts.astype(np.float64) ** 3 - counts))


def mw_exact_pvalue(a, b) -> float:
    """Two-sided exact p over all equally likely splits of the pooled ranks.

    Ranks are doubled to integers so the count of splits at least as extreme
    as the observed one is exact; the result is ``count / C(n + m, n)``.
    """
    n, m = len(a), len(b)
    ranks = rank_average(np.concatenate([np.asarray(a, float), np.asarray(b, float)]))
    r2 = [int(round(2 * r)) for r in ranks]
    obs = sum(r2[:n])
    shift = n * (n + 1) + n * m  # 2 * (n(n+1)/2 + nm/2)
    obs_dev = abs(obs - shift)
    # ways[k][s]: number of k-subsets of the pooled ranks with doubled sum s
    total_sum = sum(r2)
    ways = [[0] * (total_sum + 1) for _ in range(n + 1)]
    ways[0][0] = 1
    for r in r2:
        for k in range(n, 0, -1):
            prev, cur = ways[k - 1], ways[k]
            for s in range(total_sum, r - 1, -1):
                if prev[s - r]:
                    cur[s] += prev[s - r]
    count = sum(c for s, c in enumerate(ways[n]) if c and abs(s - shift) >= obs_dev)
    return count / math.comb(n + m, n)


def mw_normal_pvalue(u_a: float, n: int, m: int, tie_term: float) -> float:
    N = n + m
    mu = n * m / 2.0
    var = n * m / 12.0 * ((N + 1) - tie_term / (N * (N - 1)))
    if var <= 0:
        return 1.0
    z = max(abs(u_a - mu) - 0.5, 0.0) / math.sqrt(var)
    return min(1.0, math.erfc(z / math.sqrt(2.0)))


def mann_whitney_u(a, b, method: str = "auto") -> StatResult:
    """Two-sided Mann-Whitney U test; ``statistic`` is U for sample ``a``.

    ``method`` is ``"auto"`` (exact when n + m <= 12), ``"exact"`` or ``"normal"``.
    """
    a = np.asarray(a, dtype=np.float64).ravel()
    b = np.asarray(b, dtype=np.float64).ravel()
    n, m = len(a), len(b)
    if n < 1 or m < 1:
        raise TooFewPoints("both samples need at least one observation")
    pooled = np.concatenate([a, b])
    ranks = rank_average(pooled)
    u_a = float(ranks[:n].sum() - n * (n + 1) / 2.0)
    if np.all(pooled == pooled[0]):
        return StatResult(u_a, 1.0, n, m, method="degenerate", degenerate=True)
    if method == "auto":
        method = "exact" if n + m <= EXACT_MAX_N else "normal"
    if method == "exact":
        p = mw_exact_pvalue(a, b)
    elif method == "normal":
        p = mw_normal_pvalue(u_a, n, m, _tie_term(pooled))
    else:
        raise ValueError(f"unknown method {method!r}")
    return StatResult(u_a, float(min(max(p, 0.0), 1.0)), n, m, method=method)


# ---------------------------------------------------------------------------
# Student t via the regularized incomplete beta function
# ---------------------------------------------------------------------------


def _betacf(a: float, b: float, x: float) -> float:
    """Continued fraction for the incomplete beta function (modified Lentz)."""
    tiny = 1e-300
    qab, qap, qam = a + b, a + 1.0, a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    d = tiny if abs(d) < tiny else d
    d = 1.0 / d
    h = d
    for i in range(1, BETACF_MAX_ITER + 1):
        m2 = 2 * i
        aa = i * (b - i) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        d = tiny if abs(d) < tiny else d
        c = 1.0 + aa / c
        c = tiny if abs(c) < tiny else c
        d = 1.0 / d
        h *= d * c
        aa = -(a + i) * (qab + i) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        d = tiny if abs(d) < tiny else d
        c = 1.0 + aa / c
        c = tiny if abs(c) < tiny else c
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < BETACF_TOL:
            break
    return h


def betainc(a: float, b: float, x: float) -> float:
    """Regularized incomplete beta ``I_x(a, b)``."""
    if x <= 0.0:
        return 0.0
    if x >= 1.0:
        return 1.0
    ln_front = (
        math.lgamma(a + b) - math.lgamma(a) - math.lgamma(b) + a * math.log(x) + b * math.log1p(-x)
    )
    front = math.exp(ln_front)
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _betacf(a, b, x) / a
    return 1.0 - front * _betacf(b, a, 1.0 - x) / b


def t_two_sided_p(t: float, df: float) -> float:
    if math.isinf(t):
        return 0.0
    return min(1.0, betainc(df / 2.0, 0.5, df / (df + t * t)))


def t_cdf(t: float, df: float) -> float:
    tail = 0.5 * t_two_sided_p(t, df)
    return 1.0 - tail if t >= 0 else tail


def pearson(x, y) -> StatResult:
    """Sample correlation ``r`` with a two-sided t-test p-value (df = n - 2)."""
    x = np.asarray(x, dtype=np.float64).ravel()
    y = np.asarray(y, dtype=np.float64).ravel()
    if x.shape != y.shape:
        raise ValueError("samples must have equal length")
    n = len(x)
    if n < 3:
        raise TooFewPoints("pearson needs at least three pairs")
    dx = x - x.mean()
    dy = y - y.mean()
    sxx = float(dx @ dx)
    syy = float(dy @ dy)
    if sxx == 0 or syy == 0:
        raise ZeroVariance("a sample has zero variance")
    r = float(np.clip((dx @ dy) / math.sqrt(sxx * syy), -1.0, 1.0))
    df = n - 2
    if abs(r) >= 1.0:
        p = 0.0
    else:
        t = r * math.sqrt(df / (1.0 - r * r))
        p = t_two_sided_p(t, df)
    return StatResult(r, p, n, n, method="t")
