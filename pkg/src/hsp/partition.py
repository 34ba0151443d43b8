"""Partitions, permutations and the Chinese restaurant process.

Partitions are stored as label vectors in canonical first-appearance form
with 1-based labels, e.g. ``(1, 1, 2, 1)``.  Permutations are 0-based
visiting orders, so ``Permutation((2, 0, 1))`` visits item 2 first.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Iterator, Sequence

import numpy as np

from .errors import InvalidArgumentError, ResourceLimitError

MAX_ENUMERATION = 12


@dataclass(frozen=True)
class Partition:
    labels: tuple[int, ...]

    def __post_init__(self):
        labels = tuple(int(v) for v in self.labels)
        if not labels:
            raise InvalidArgumentError("a partition needs at least one item")
        nxt = 1
        for v in labels:
            if v > nxt or v < 1:
                raise InvalidArgumentError(
                    f"labels {labels} are not in canonical first-appearance form; "
                    "use canonicalize()"
                )
            if v == nxt:
                nxt += 1
        object.__setattr__(self, "labels", labels)

    @property
    def n_items(self) -> int:
        return len(self.labels)

    @property
    def num_clusters(self) -> int:
        return max(self.labels)

    @property
    def cluster_sizes(self) -> tuple[int, ...]:
        sizes = [0] * self.num_clusters
        for v in self.labels:
            sizes[v - 1] += 1
        return tuple(sizes)

    def blocks(self) -> list[list[int]]:
        """Clusters as lists of 0-based item indices, in label order."""
        out: list[list[int]] = [[] for _ in range(self.num_clusters)]
        for i, v in enumerate(self.labels):
            out[v - 1].append(i)
        return out

    def as_array(self, zero_based: bool = False) -> np.ndarray:
        arr = np.asarray(self.labels, dtype=np.int64)
        return arr - 1 if zero_based else arr

    def __len__(self) -> int:
        return len(self.labels)

    def __str__(self) -> str:
        return format_partition(self)


@dataclass(frozen=True)
class Permutation:
    order: tuple[int, ...]

    def __post_init__(self):
        order = tuple(int(v) for v in self.order)
        if sorted(order) != list(range(len(order))) or not order:
            raise InvalidArgumentError(f"{order} is not a permutation of 0..n-1")
        object.__setattr__(self, "order", order)

    @property
    def n_items(self) -> int:
        return len(self.order)

    @classmethod
    def identity(cls, n: int) -> "Permutation":
        return cls(tuple(range(n)))

    def as_array(self) -> np.ndarray:
        return np.asarray(self.order, dtype=np.int64)

    def __len__(self) -> int:
        return len(self.order)


def canonicalize(raw_labels: Iterable[int]) -> Partition:
    """Relabel clusters by order of first appearance, starting at 1."""
    if isinstance(raw_labels, Partition):
        return raw_labels
    raw = [int(v) for v in np.asarray(list(raw_labels)).ravel()]
    if not raw:
        raise InvalidArgumentError("cannot canonicalize an empty label vector")
    mapping: dict[int, int] = {}
    out = []
    for v in raw:
        if v not in mapping:
            mapping[v] = len(mapping) + 1
        out.append(mapping[v])
    return Partition(tuple(out))


def canonical_array(labels: np.ndarray) -> np.ndarray:
    """Vectorised canonical relabel of one label vector, 0-based output."""
    labels = np.asarray(labels)
    _, first, inverse = np.unique(labels, return_index=True, return_inverse=True)
    rank = np.empty(len(first), dtype=np.int64)
    rank[np.argsort(first)] = np.arange(len(first))
    return rank[inverse.ravel()]


def crp_log_pmf(p: Partition, beta: float) -> float:
    """Closed-form log pmf of a CRP(beta) partition."""
    if not beta > 0:
        raise InvalidArgumentError(f"CRP mass must be positive, got {beta}")
    n = p.n_items
    out = math.lgamma(beta) - math.lgamma(n + beta) + p.num_clusters * math.log(beta)
    return out + sum(math.lgamma(s) for s in p.cluster_sizes)


def crp_predictive(prefix_counts: Sequence[int], t: int, beta: float) -> np.ndarray:
    """Allocation probabilities for the t-th item (1-based) given earlier cluster sizes.

    The last entry is the probability of opening a new cluster.
    """
    if not beta > 0:
        raise InvalidArgumentError(f"CRP mass must be positive, got {beta}")
    counts = np.asarray(prefix_counts, dtype=float)
    if t < 1 or counts.sum() != t - 1 or np.any(counts < 1):
        raise InvalidArgumentError(
            f"prefix counts {list(prefix_counts)} do not describe {t - 1} earlier items"
        )
    return np.append(counts, beta) / (beta + t - 1)


def uniform_permutation(n: int, rng: np.random.Generator) -> Permutation:
    if n < 1:
        raise InvalidArgumentError("permutation size must be at least 1")
    return Permutation(tuple(int(v) for v in rng.permutation(n)))


def iter_partitions(n: int) -> Iterator[tuple[int, ...]]:
    """Restricted growth strings of length n (canonical 1-based labels)."""
    if n < 1:
        raise InvalidArgumentError("n must be at least 1")
    labels = [1] * n
    maxes = [1] * n  # maxes[i] = max(labels[:i+1])

    def rec(i):
        if i == n:
            yield tuple(labels)
            return
        top = maxes[i - 1]
        for v in range(1, top + 2):
            labels[i] = v
            maxes[i] = max(top, v)
            yield from rec(i + 1)

    yield from rec(1)


def enumerate_partitions(n: int) -> list[Partition]:
    if n > MAX_ENUMERATION:
        raise ResourceLimitError(
            f"enumerating partitions of {n} items exceeds the limit of {MAX_ENUMERATION}"
        )
    return [Partition(p) for p in iter_partitions(n)]


def bell_number(n: int) -> int:
    row = [1]
    for _ in range(n):
        nxt = [row[-1]]
        for v in row:
            nxt.append(nxt[-1] + v)
        row = nxt
    return row[0]


def format_partition(p: Partition | Sequence[int]) -> str:
    labels = p.labels if isinstance(p, Partition) else p
    return ",".join(str(int(v)) for v in labels)


def parse_partition(line: str) -> Partition:
    line = line.strip()
    if not line:
        raise InvalidArgumentError("empty partition line")
    try:
        raw = [int(tok) for tok in line.split(",")]
    except ValueError as exc:
        raise InvalidArgumentError(f"bad partition line {line!r}") from exc
    return canonicalize(raw)
