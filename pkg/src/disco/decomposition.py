"""One-way distance components: total = between + within, and the F ratio.

Two interchangeable back-ends compute within-group sums of index-power
distances for many relabelings at once:

* :class:`MatrixDispersion` works from a precomputed :class:`DistanceMatrix`
  (any dimension, any index);
* :class:`SortedDispersion` handles univariate data at index 1 in
  O(N log N) per relabeling without ever forming the N x N matrix.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy import stats

from .core_stats import (
    DistanceMatrix,
    IndexGroups,
    as_data_matrix,
    check_index,
    linearized_within_sums,
    pairwise_alpha_distances,
)
from .errors import DataError, DegenerateError, DesignError

__all__ = [
    "DEFAULT_FAST_THRESHOLD",
    "GiniSumMatrix",
    "DiscoComponents",
    "AnovaResult",
    "gini_sum_matrix",
    "oneway_disco",
    "between_via_pairs",
    "classical_anova",
    "f_ratio",
    "MatrixDispersion",
    "SortedDispersion",
    "make_dispersion",
    "oneway_disco_data",
]

DEFAULT_FAST_THRESHOLD = 2048


@dataclass(frozen=True)
class GiniSumMatrix:
    """``G[j, k] = n_j n_k g(A_j, A_k)``, the block sums of the distance matrix."""

    G: np.ndarray
    sizes: np.ndarray

    @property
    def k(self) -> int:
        return self.G.shape[0]

    def gini_means(self) -> np.ndarray:
        """The a x a matrix of Gini means ``g(A_j, A_k)``."""
        return self.G / np.outer(self.sizes, self.sizes)


@dataclass(frozen=True)
class DiscoComponents:
    alpha: float
    total: float
    between: float
    within: float
    df_between: int
    df_within: int
    f_ratio: float

    @property
    def mean_between(self) -> float:
        return self.between / self.df_between

    @property
    def mean_within(self) -> float:
        return self.within / self.df_within


class AnovaResult(NamedTuple):
    sst: float
    sse: float
    f: float
    df_between: int
    df_within: int
    p_value: float


def _check_oneway_design(n: int, k: int) -> None:
    if k < 2:
        raise DesignError("factor has one level; need at least two groups")
    if n < k + 1:
        raise DesignError(f"need N >= K + 1 observations, got N={n}, K={k}")


def f_ratio(between, within, df_between, df_within, total=None) -> float:
    """``(between/df_between) / (within/df_within)`` with degenerate cases rejected."""
    if within <= 0.0:
        if total == 0.0 or between <= 0.0:
            raise DegenerateError("all observations identical; F ratio undefined")
        raise DegenerateError("degenerate within-dispersion (W = 0); F ratio undefined")
    return (between / df_between) / (within / df_within)


def gini_sum_matrix(D: DistanceMatrix, groups: IndexGroups) -> GiniSumMatrix:
    """Compute ``G = M' D M`` with ``M`` the (N, a) group indicator matrix."""
    if groups.n != D.n:
        raise DataError(f"groups cover {groups.n} observations, distance matrix has {D.n}")
    M = groups.indicator()
    G = M.T @ D.values @ M
    G = 0.5 * (G + G.T)
    G.setflags(write=False)
    return GiniSumMatrix(G, groups.sizes)


def oneway_disco(D: DistanceMatrix, groups: IndexGroups, check_pairs: bool = False) -> DiscoComponents:
    """Decompose total dispersion on a single grouping.

    ``T = sum(D) / 2N``, ``W = sum_j G_jj / 2 n_j`` and ``S = T - W``.
    With ``check_pairs`` the between component is recomputed from pairwise
    two-sample distances and must agree to 1e-9 relative to ``T``.
    """
    gs = gini_sum_matrix(D, groups)
    n, k = groups.n, groups.k
    _check_oneway_design(n, k)
    total = D.total() / (2.0 * n)
    within = float(np.sum(np.diag(gs.G) / (2.0 * gs.sizes)))
    between = total - within
    if check_pairs:
        alt = between_via_pairs(D, groups)
        if abs(alt - between) > 1e-9 * max(total, np.finfo(float).tiny):
            raise ArithmeticError(f"between component mismatch: {between!r} vs {alt!r}")
    df_b, df_w = k - 1, n - k
    f = f_ratio(between, within, df_b, df_w, total)
    return DiscoComponents(D.alpha, total, between, within, df_b, df_w, f)


def between_via_pairs(D: DistanceMatrix, groups: IndexGroups) -> float:
    """Between-sample dispersion as a weighted sum of pairwise two-sample distances.

    ``sum_{j<k} (n_j n_k / 2N) (2 g_jk - g_jj - g_kk)``
    """
    _check_oneway_design(groups.n, groups.k)
    g = gini_sum_matrix(D, groups).gini_means()
    n = groups.sizes.astype(float)
    N = groups.n
    s = 0.0
    for j in range(groups.k):
        for k in range(j + 1, groups.k):
            s += n[j] * n[k] / (2.0 * N) * (2.0 * g[j, k] - g[j, j] - g[k, k])
    return s


def classical_anova(data, groups: IndexGroups) -> AnovaResult:
    """One-way ANOVA sums of squares from their definitions, with the F test p-value."""
    y = as_data_matrix(data)
    if y.shape[1] != 1:
        raise DataError("classical_anova needs a univariate response")
    y = y[:, 0]
    if y.size != groups.n:
        raise DataError("data and groups differ in length")
    n, k = groups.n, groups.k
    _check_oneway_design(n, k)
    grand = y.mean()
    sst = sse = 0.0
    for j in range(k):
        yj = y[groups.codes == j]
        mj = yj.mean()
        sst += yj.size * (mj - grand) ** 2
        sse += float(np.sum((yj - mj) ** 2))
    df_b, df_w = k - 1, n - k
    if sse == 0.0:
        raise DegenerateError("zero residual sum of squares; F undefined")
    f = (sst / df_b) / (sse / df_w)
    return AnovaResult(sst, sse, f, df_b, df_w, float(stats.f.sf(f, df_b, df_w)))


class MatrixDispersion:
    """Within-cell dispersions from a precomputed distance matrix."""

    def __init__(self, D: DistanceMatrix):
        self.D = D
        self.alpha = D.alpha
        self.n = D.n
        self.total = D.total() / (2.0 * D.n)

    def within(self, codes: np.ndarray, k: int) -> np.ndarray:
        """Within dispersion ``sum_c G_cc / 2 n_c`` for each row of ``codes`` (R, N)."""
        codes = np.atleast_2d(codes)
        r, n = codes.shape
        onehot = np.zeros((n, r, k))
        onehot[np.arange(n)[:, None], np.arange(r)[None, :], codes.T] = 1.0
        prod = (self.D.values @ onehot.reshape(n, r * k)).reshape(n, r, k)
        diag = np.einsum("irc,irc->rc", onehot, prod)
        sizes = onehot.sum(axis=0)
        return np.sum(np.divide(diag, 2.0 * sizes, out=np.zeros_like(diag), where=sizes > 0), axis=1)


class SortedDispersion:
    """Univariate index-1 dispersions by sorting, O(N log N) per relabeling."""

    alpha = 1.0

    def __init__(self, values):
        y = as_data_matrix(values)
        if y.shape[1] != 1:
            raise DataError("the sorted back-end needs univariate data")
        y = y[:, 0]
        self.n = y.size
        self._order = np.argsort(y, kind="stable")
        self._sorted = y[self._order]
        self.total = linearized_within_sums(y) / self.n

    def within(self, codes: np.ndarray, k: int) -> np.ndarray:
        codes = np.atleast_2d(codes)
        r, n = codes.shape
        c = codes[:, self._order]
        pos = np.argsort(c, axis=1, kind="stable")
        cs = np.take_along_axis(c, pos, axis=1)
        ys = self._sorted[pos]
        rows = np.arange(r)[:, None]
        counts = np.zeros((r, k), dtype=np.intp)
        np.add.at(counts, (rows, cs), 1)
        starts = np.cumsum(counts, axis=1) - counts
        # cells are contiguous in cs and each cell stays sorted (stable sort)
        rank = np.arange(n)[None, :] - starts[rows, cs] + 1
        w = 2.0 * rank - counts[rows, cs] - 1.0
        flat = (cs + k * rows).ravel()
        pair = np.bincount(flat, weights=(w * ys).ravel(), minlength=r * k).reshape(r, k)
        return np.sum(np.divide(pair, counts, out=np.zeros_like(pair), where=counts > 0), axis=1)


def make_dispersion(data, alpha: float = 1.0, fast_threshold: int | None = DEFAULT_FAST_THRESHOLD):
    """Pick the sorted back-end for univariate index-1 data with N above ``fast_threshold``."""
    alpha = check_index(alpha)
    x = as_data_matrix(data)
    if fast_threshold is not None and alpha == 1.0 and x.shape[1] == 1 and x.shape[0] > fast_threshold:
        return SortedDispersion(x)
    return MatrixDispersion(pairwise_alpha_distances(x, alpha))


def oneway_disco_data(data, groups: IndexGroups, alpha: float = 1.0,
                      fast_threshold: int | None = DEFAULT_FAST_THRESHOLD) -> DiscoComponents:
    """:func:`oneway_disco` starting from raw observations."""
    disp = make_dispersion(data, alpha, fast_threshold)
    if groups.n != disp.n:
        raise DataError(f"groups cover {groups.n} observations, data has {disp.n}")
    n, k = groups.n, groups.k
    _check_oneway_design(n, k)
    within = float(disp.within(groups.codes, k)[0])
    between = disp.total - within
    f = f_ratio(between, within, k - 1, n - k, disp.total)
    return DiscoComponents(disp.alpha, disp.total, between, within, k - 1, n - k, f)
