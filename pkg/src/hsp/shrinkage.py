"""Shrinkage partition (SP) distribution with a CRP baseline.

The SP distribution visits items in the order given by a permutation and
tilts each CRP allocation towards clusters that already hold items sharing
the current item's label in a base partition.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import _kernels as K
from .errors import InvalidArgumentError
from .partition import Partition, Permutation, canonicalize


@dataclass(frozen=True, eq=False)
class SpParams:
    """Base partition, per-position shrinkage, visit order and CRP mass.

    ``shrinkage`` may be given as a scalar, which is broadcast to all
    positions.  Entry ``t`` applies to the ``t``-th visited item.
    """

    base: Partition
    shrinkage: np.ndarray
    perm: Permutation
    baseline_mass: float = 1.0
    _table: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        base = canonicalize(self.base)
        n = base.n_items
        lam = np.asarray(self.shrinkage, dtype=np.float64)
        if lam.ndim == 0:
            lam = np.full(n, float(lam))
        perm = self.perm if isinstance(self.perm, Permutation) else Permutation(tuple(self.perm))
        if lam.shape != (n,) or perm.n_items != n:
            raise InvalidArgumentError(
                f"base has {n} items but shrinkage has shape {lam.shape} "
                f"and permutation {perm.n_items} entries"
            )
        if np.any(lam < 0) or not np.all(np.isfinite(lam)):
            raise InvalidArgumentError("shrinkage entries must be finite and non-negative")
        if not self.baseline_mass > 0:
            raise InvalidArgumentError("baseline CRP mass must be positive")
        lam.setflags(write=False)
        object.__setattr__(self, "base", base)
        object.__setattr__(self, "shrinkage", lam)
        object.__setattr__(self, "perm", perm)
        object.__setattr__(self, "baseline_mass", float(self.baseline_mass))
        object.__setattr__(self, "_table", K.make_table(lam, n))

    @property
    def n_items(self) -> int:
        return self.base.n_items


def sp_allocation_probs(
    prefix_labels: Sequence[int], params: SpParams, t: int, log: bool = False
) -> np.ndarray:
    """Allocation probabilities of the t-th visited item (t is 1-based).

    ``prefix_labels`` are the labels of the items visited at positions
    1..t-1.  The result lists the prefix clusters in order of first
    appearance, then the new-cluster probability; ``log=True`` returns log
    probabilities.  Evaluated directly, independently of the compiled kernels.
    """
    n = params.n_items
    if not 1 <= t <= n:
        raise InvalidArgumentError(f"position {t} outside 1..{n}")
    prefix = list(prefix_labels)
    if len(prefix) != t - 1:
        raise InvalidArgumentError(f"expected {t - 1} prefix labels, got {len(prefix)}")
    if t == 1:
        return np.array([0.0 if log else 1.0])
    order = params.perm.order
    base = params.base.labels
    lam = params.shrinkage[t - 1]
    beta = params.baseline_mass
    current_base = base[order[t - 1]]
    prefix_base = [base[order[k]] for k in range(t - 1)]
    shared = sum(1 for b in prefix_base if b == current_base)

    clusters: list[int] = []
    for v in prefix:
        if v not in clusters:
            clusters.append(v)
    logw = []
    for s in clusters:
        size = sum(1 for v in prefix if v == s)
        if shared > 0:
            hits = sum(1 for v, b in zip(prefix, prefix_base) if v == s and b == current_base)
            frac = hits / shared
        else:
            frac = 0.0
        logw.append(math.log(size / (beta + t - 1)) + lam * frac)
    logw.append(math.log(beta / (beta + t - 1)) + lam * (1.0 if shared == 0 else 0.0))
    logw = np.array(logw)
    logw -= logw.max()
    logw -= math.log(np.exp(logw).sum())
    return logw if log else np.exp(logw)


def _check(p: Partition, params: SpParams) -> np.ndarray:
    p = canonicalize(p)
    if p.n_items != params.n_items:
        raise InvalidArgumentError(
            f"partition has {p.n_items} items, SP parameters have {params.n_items}"
        )
    return p.as_array(zero_based=True)


def sp_log_pmf(p: Partition, params: SpParams) -> float:
    labels = _check(p, params)
    ws = K.make_workspace(params.n_items)
    return float(
        K.sp_logpmf_from(
            labels,
            params.base.as_array(zero_based=True),
            params.shrinkage,
            params._table,
            params.perm.as_array(),
            params.baseline_mass,
            0,
            *ws,
        )
    )


def _kernel_seed(rng: np.random.Generator) -> None:
    K.seed(int(rng.integers(0, 2**32 - 1)))


def sp_sample(params: SpParams, rng: np.random.Generator, size: int | None = None):
    """Forward draw(s) from the SP distribution.

    Returns one :class:`Partition`, or a ``(size, n)`` array of 1-based
    canonical labels when ``size`` is given.
    """
    _kernel_seed(rng)
    ws = K.make_workspace(params.n_items)
    draws = K.sp_draw_many(
        params.base.as_array(zero_based=True),
        params.shrinkage,
        params._table,
        params.perm.as_array(),
        params.baseline_mass,
        1 if size is None else int(size),
        *ws,
    )
    draws += 1
    if size is None:
        return Partition(tuple(draws[0]))
    return draws
