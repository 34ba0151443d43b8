"""Synthetic datasets mirroring the simulation designs for the HSP model.

Every generator takes a ``numpy.random.Generator`` and returns a
:class:`SyntheticDataset` with the ground-truth partitions attached.
Random draws happen subject by subject: optional contamination of the
label template, then the order of the cluster means, then the data column.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidArgumentError
from .model import DataMatrix
from .partition import Partition, canonicalize

CLUSTER_MEANS = (-0.97, 0.15, 1.37)
NOISE_VARIANCE = 0.16


def _blocks(*labels, width=5):
    return tuple(v for v in labels for _ in range(width))


# condition-label templates of the three subject groups, 30 conditions each
SIM1_TEMPLATES = (
    _blocks(1, 1, 2, 2, 3, 3),
    _blocks(1, 2, 3, 1, 3, 2),
    _blocks(1, 2, 1, 3, 2, 3),
)
SIM2_NU0 = _blocks(1, 2, 3, 4, 5, 6)
SHARED_TEMPLATE = _blocks(1, 2, 3, width=10)


@dataclass
class SyntheticDataset:
    data: DataMatrix
    true_subject_partition: Partition
    true_condition_partitions: list[Partition]
    scenario: str
    seed: int | None = None
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        I, J = self.data.values.shape
        if self.true_subject_partition.n_items != J or len(self.true_condition_partitions) != J:
            raise InvalidArgumentError("truth does not match the number of subjects")
        if any(p.n_items != I for p in self.true_condition_partitions):
            raise InvalidArgumentError("truth does not match the number of conditions")


def _redraw(labels: np.ndarray, level: float, rng: np.random.Generator, n_labels: int):
    if not 0.0 <= level <= 1.0:
        raise InvalidArgumentError(f"contamination level must lie in [0, 1], got {level}")
    out = np.array(labels, dtype=np.int64)
    k = int(round(level * len(out)))
    if k:
        idx = rng.choice(len(out), size=k, replace=False)
        out[idx] = rng.integers(1, n_labels + 1, size=k)
    return out


def contaminate(labels, level: float, rng: np.random.Generator, n_labels: int = 3) -> Partition:
    """Redraw round(level * n) randomly chosen labels uniformly from 1..n_labels.

    Positions are chosen without replacement; a redrawn label may equal the
    old one.
    """
    raw = labels.labels if isinstance(labels, Partition) else labels
    return canonicalize(_redraw(raw, level, rng, n_labels))


def _generate(templates, group_sizes, rng, scenario, level=0.0, shared_means=False,
              seed=None, extra=None):
    means = np.asarray(CLUSTER_MEANS)
    sd = np.sqrt(NOISE_VARIANCE)
    I = len(templates[0])
    J = sum(group_sizes)
    y = np.empty((I, J))
    groups, truth = [], []
    j = 0
    for g, (template, size) in enumerate(zip(templates, group_sizes)):
        for _ in range(size):
            raw = np.asarray(template, dtype=np.int64)
            if level > 0:
                raw = _redraw(raw, level, rng, len(means))
            order = means if shared_means else rng.permutation(means)
            y[:, j] = rng.normal(order[raw - 1], sd)
            groups.append(g + 1)
            truth.append(canonicalize(raw))
            j += 1
    meta = {
        "group_sizes": list(group_sizes),
        "cluster_means": list(CLUSTER_MEANS),
        "noise_variance": NOISE_VARIANCE,
        "contamination": level,
    }
    meta.update(extra or {})
    return SyntheticDataset(DataMatrix(y), canonicalize(groups), truth, scenario, seed, meta)


def generate_sim1a(rng: np.random.Generator, seed: int | None = None) -> SyntheticDataset:
    """60 subjects in three groups of 20, 30 conditions in three clusters of 10."""
    return _generate(SIM1_TEMPLATES, (20, 20, 20), rng, "sim1a", seed=seed)


def generate_sim1b(level: float, rng: np.random.Generator,
                   seed: int | None = None) -> SyntheticDataset:
    """Sim 1(a) with each subject's label template contaminated at ``level``."""
    if not 0.0 <= level <= 1.0:
        raise InvalidArgumentError(f"contamination level must lie in [0, 1], got {level}")
    return _generate(SIM1_TEMPLATES, (20, 20, 20), rng, f"sim1b:{level:g}", level=level, seed=seed)


def generate_sim2(rng: np.random.Generator, seed: int | None = None) -> SyntheticDataset:
    """Same truth and data law as Sim 1(a), plus the six-block condition base partition."""
    ds = _generate(SIM1_TEMPLATES, (20, 20, 20), rng, "sim2", seed=seed,
                   extra={"nu0": list(SIM2_NU0)})
    return ds


def generate_large(rng: np.random.Generator, seed: int | None = None) -> SyntheticDataset:
    """Sim 1(a) structure with 180 subjects."""
    return _generate(SIM1_TEMPLATES, (60, 60, 60), rng, "large", seed=seed)


def generate_shared_nested(rng: np.random.Generator, seed: int | None = None) -> SyntheticDataset:
    """Ten subjects sharing one condition partition and one set of cluster means."""
    return _generate((SHARED_TEMPLATE,), (10,), rng, "shared", shared_means=True, seed=seed)


SCENARIOS = ("sim1a", "sim1b", "sim2", "large", "shared")


def generate(scenario: str, rng: np.random.Generator, seed: int | None = None) -> SyntheticDataset:
    """Dispatch on a scenario tag such as ``sim1a`` or ``sim1b:0.2``."""
    name, _, arg = scenario.partition(":")
    if name == "sim1b":
        if not arg:
            raise InvalidArgumentError("sim1b needs a contamination level, e.g. sim1b:0.1")
        try:
            level = float(arg)
        except ValueError as exc:
            raise InvalidArgumentError(f"bad contamination level {arg!r}") from exc
        return generate_sim1b(level, rng, seed)
    if arg:
        raise InvalidArgumentError(f"scenario {name!r} takes no argument")
    table = {
        "sim1a": generate_sim1a,
        "sim2": generate_sim2,
        "large": generate_large,
        "shared": generate_shared_nested,
    }
    if name not in table:
        raise InvalidArgumentError(
            f"unknown scenario {scenario!r}; expected one of {', '.join(SCENARIOS)}"
        )
    return table[name](rng, seed)
