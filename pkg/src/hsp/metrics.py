"""Partition comparison metrics and posterior summaries of partition draws.

All metrics accept :class:`Partition` objects or plain label sequences.
Entropies use natural logarithms, so VI is reported in nats.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from numba import njit

from .errors import InvalidArgumentError
from .partition import Partition, canonical_array


def _pair(p, q):
    a = canonical_array(p.labels if isinstance(p, Partition) else p)
    b = canonical_array(q.labels if isinstance(q, Partition) else q)
    if a.shape != b.shape:
        raise InvalidArgumentError(f"partitions differ in size: {a.size} vs {b.size}")
    return a, b


def contingency_table(p, q) -> np.ndarray:
    a, b = _pair(p, q)
    table = np.zeros((a.max() + 1, b.max() + 1), np.int64)
    np.add.at(table, (a, b), 1)
    return table


def _comb2(x):
    x = np.asarray(x, dtype=np.float64)
    return x * (x - 1) / 2


def adjusted_rand_index(p, q) -> float:
    """Hubert-Arabie adjusted Rand index.

    When the maximum index equals its expectation (both partitions trivial
    in the same way, or one all-singletons against one block) the index is
    undefined; identical partitions then score 1 and anything else 0.
    """
    table = contingency_table(p, q)
    n = table.sum()
    index = _comb2(table).sum()
    rows = _comb2(table.sum(axis=1)).sum()
    cols = _comb2(table.sum(axis=0)).sum()
    expected = rows * cols / _comb2(n) if n > 1 else 0.0
    maximum = 0.5 * (rows + cols)
    if maximum == expected:
        a, b = _pair(p, q)
        return 1.0 if np.array_equal(a, b) else 0.0
    return float((index - expected) / (maximum - expected))


def _directed_f1(table):
    sizes_a = table.sum(axis=1)
    sizes_b = table.sum(axis=0)
    f = 2.0 * table / (sizes_a[:, None] + sizes_b[None, :])
    return float((sizes_a * f.max(axis=1)).sum() / table.sum())


def symmetrized_f1(p, q) -> float:
    """Average of the two size-weighted best-match F1 scores."""
    table = contingency_table(p, q)
    return 0.5 * (_directed_f1(table) + _directed_f1(table.T))


def _entropy(counts):
    counts = np.asarray(counts, dtype=np.float64)
    counts = counts[counts > 0]
    n = counts.sum()
    return float(-(counts / n * np.log(counts / n)).sum())


def variation_of_information(p, q) -> float:
    table = contingency_table(p, q)
    h_joint = _entropy(table.ravel())
    vi = 2 * h_joint - _entropy(table.sum(axis=1)) - _entropy(table.sum(axis=0))
    return max(vi, 0.0)


@dataclass
class CoClusterMatrix:
    probs: np.ndarray
    item_names: list[str]

    def __post_init__(self):
        n = self.probs.shape[0]
        if self.probs.shape != (n, n) or len(self.item_names) != n:
            raise InvalidArgumentError("co-clustering matrix must be square and fully named")


def _as_label_matrix(partitions) -> np.ndarray:
    if isinstance(partitions, np.ndarray) and partitions.ndim == 2:
        x = np.asarray(partitions, dtype=np.int64)
    else:
        rows = [p.labels if isinstance(p, Partition) else p for p in partitions]
        if not rows:
            raise InvalidArgumentError("need at least one partition")
        if len({len(r) for r in rows}) != 1:
            raise InvalidArgumentError("partitions differ in size")
        x = np.asarray(rows, dtype=np.int64)
    if x.shape[0] == 0:
        raise InvalidArgumentError("need at least one partition")
    return x


def coclustering_matrix(partitions, item_names: Sequence[str] | None = None) -> CoClusterMatrix:
    """Fraction of draws placing each pair of items together.

    ``partitions`` is a sequence of partitions or a (T, n) label array; labels
    need not be canonical.
    """
    x = _as_label_matrix(partitions)
    T, n = x.shape
    x = x - x.min(axis=1, keepdims=True)
    counts = np.zeros((n, n))
    for k in range(int(x.max()) + 1):
        ind = (x == k).astype(np.float64)
        counts += ind.T @ ind
    probs = counts / T
    np.fill_diagonal(probs, 1.0)
    names = list(item_names) if item_names is not None else [str(i + 1) for i in range(n)]
    return CoClusterMatrix(probs, names)


@njit(cache=True)
def _clogc_steps(n):
    # step[c] = (c + 1) log(c + 1) - c log c, so sums of c log c build up by counting
    step = np.zeros(n + 1)
    prev = 0.0
    for c in range(n):
        cur = (c + 1) * math.log(c + 1)
        step[c] = cur - prev
        prev = cur
    return step


@njit(cache=True)
def _size_terms(uniq, ncl, step):
    """sum over clusters of size * log(size), per row."""
    U, n = uniq.shape
    s = np.zeros(U)
    cnt = np.zeros(n + 1, np.int64)
    for u in range(U):
        for k in range(ncl[u]):
            cnt[k] = 0
        for i in range(n):
            s[u] += step[cnt[uniq[u, i]]]
            cnt[uniq[u, i]] += 1
    return s


@njit(cache=True)
def _vi_to_all(u, uniq, weights, s, step, table, cutoff):
    """Weighted mean VI from row u to every row (n VI = s_u + s_v - 2 s_joint).

    Returns inf as soon as the partial mean exceeds ``cutoff``; every term
    is non-negative, so the full mean would too.
    """
    U, n = uniq.shape
    stop = cutoff * weights.sum()
    total = 0.0
    for v in range(U):
        if v == u:
            continue
        sj = 0.0
        for i in range(n):
            a = uniq[u, i]
            b = uniq[v, i]
            sj += step[table[a, b]]
            table[a, b] += 1
        for i in range(n):
            table[uniq[u, i], uniq[v, i]] = 0
        total += weights[v] * (s[u] + s[v] - 2.0 * sj) / n
        if total > stop:
            return np.inf
    return total / weights.sum()


def _vi_lower_bounds(uniq, weights, s):
    """Jensen lower bound on each row's mean VI, from the co-clustering matrix."""
    U, n = uniq.shape
    w = weights / weights.sum()
    same = uniq[:, :, None] == uniq[:, None, :]
    P = np.einsum("u,uij->ij", w, same.astype(np.float64))
    # E log|q_i| over draws, summed over items, equals log n terms from s
    e_logq = float(w @ s)
    overlap = (same * P[None]).sum(axis=2)
    return (s + e_logq - 2.0 * np.log(overlap).sum(axis=1)) / n


def vi_point_estimate(partitions) -> Partition:
    """The sampled partition with the smallest mean VI to all draws.

    Exact over the distinct sampled partitions; a co-clustering lower bound
    decides which candidates need the full pairwise evaluation.  Ties go to
    the partition drawn first.
    """
    x = _as_label_matrix(partitions)
    canon = x - x[:, :1] if _is_canonical(x) else np.array([canonical_array(row) for row in x])
    uniq, first, counts = np.unique(canon, axis=0, return_index=True, return_counts=True)
    order = np.argsort(first)
    uniq = np.ascontiguousarray(uniq[order]).astype(np.int64)
    weights = counts[order].astype(np.float64)
    n = uniq.shape[1]
    step = _clogc_steps(n)
    s = _size_terms(uniq, uniq.max(axis=1) + 1, step)
    bounds = _vi_lower_bounds(uniq, weights, s)
    table = np.zeros((n, n), np.int64)
    exact = {}
    best = np.inf
    for u in np.argsort(bounds, kind="stable"):
        if bounds[u] > best + 1e-9:
            break
        exact[int(u)] = _vi_to_all(int(u), uniq, weights, s, step, table, best + 1e-9)
        best = min(best, exact[int(u)])
    cands = sorted(u for u, v in exact.items() if v <= best + 1e-12)
    return Partition(tuple(int(v) + 1 for v in uniq[cands[0]]))


def _is_canonical(x):
    # 0-based canonical rows: each new label is one more than the running max
    z = x - x[:, :1]
    if np.any(z[:, 0] != 0):
        return False
    running = np.maximum.accumulate(z, axis=1)
    prev = np.concatenate([np.full((len(z), 1), -1), running[:, :-1]], axis=1)
    return bool(np.all((z <= prev) | (z == prev + 1)) and np.all(z >= 0))
