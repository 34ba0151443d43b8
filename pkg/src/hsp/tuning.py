"""Step-by-step selection of the shrinkage parameters (lambda, rho, tau).

Each grid point is one sampler run.  Its VI point estimates are scored
against the base partitions: the subject estimate against ``c0``, and each
subject's condition estimate against ``nu0``.  The selection first sweeps
lambda with tau fixed at 0 and rho drawn from its grid, then rho, then tau.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import HSPError, InvalidArgumentError
from .metrics import adjusted_rand_index, symmetrized_f1, vi_point_estimate
from .model import DataMatrix, Hyperparams
from .sampler import SamplerConfig, run_chain

log = logging.getLogger(__name__)

PARAMETERS = ("lam", "rho", "tau")
_ALIASES = {"lambda": "lam", "lam": "lam", "rho": "rho", "tau": "tau"}
DEFAULT_PLATEAU = 0.02


@dataclass
class GridSpec:
    """Values of one shrinkage parameter to sweep, the others held at ``fixed``."""

    parameter: str
    values: tuple
    fixed: dict = field(default_factory=dict)
    chains: int = 1
    iterations: int | None = None

    def __post_init__(self):
        if self.parameter not in _ALIASES:
            raise InvalidArgumentError(
                f"unknown grid parameter {self.parameter!r}; use lambda, rho or tau"
            )
        self.parameter = _ALIASES[self.parameter]
        self.values = tuple(float(v) for v in self.values)
        if not self.values:
            raise InvalidArgumentError(f"grid for {self.parameter} is empty")
        v = np.asarray(self.values)
        if np.any(v < 0) or np.any(np.diff(v) <= 0):
            raise InvalidArgumentError(
                f"grid for {self.parameter} must be non-negative and strictly ascending"
            )
        self.fixed = {_ALIASES[k]: float(x) for k, x in self.fixed.items()}
        if self.parameter in self.fixed:
            raise InvalidArgumentError(f"{self.parameter} cannot be both swept and fixed")
        if self.chains < 1:
            raise InvalidArgumentError("chains must be at least 1")


@dataclass
class SensitivityRow:
    value: float
    subject_ari: float
    subject_f1: float
    condition_ari: float
    condition_f1: float


class GridPointError(HSPError):
    """A sampler run failed at one grid value; the original error is the cause."""

    def __init__(self, parameter, value, cause):
        super().__init__(f"{parameter}={value:g}: {cause}")
        self.parameter = parameter
        self.value = value


def _score(data, h, cfg, chains, offset):
    subj, cond = [], []
    for chain in range(chains):
        tr = run_chain(data, h, cfg, chain=offset + chain)
        subj.append(tr.subject)
        cond.append(tr.condition)
    subj = np.concatenate(subj)
    cond = np.concatenate(cond)
    c_hat = vi_point_estimate(subj)
    pis = [vi_point_estimate(cond[:, j]) for j in range(cond.shape[1])]
    return (
        adjusted_rand_index(c_hat, h.c0),
        symmetrized_f1(c_hat, h.c0),
        float(np.mean([adjusted_rand_index(p, h.nu0) for p in pis])),
        float(np.mean([symmetrized_f1(p, h.nu0) for p in pis])),
    )


def grid_sensitivity(data: DataMatrix, h: Hyperparams, grid: GridSpec,
                     cfg: SamplerConfig) -> list[SensitivityRow]:
    """Run the sampler at every grid value and score its point estimates.

    Grid point ``g`` uses chains ``g * grid.chains`` onwards of ``cfg.seed``,
    so every run has its own stream and the table is reproducible.
    """
    if grid.iterations is not None:
        cfg = replace(cfg, iterations=grid.iterations,
                      burn_in=min(cfg.burn_in, grid.iterations // 5))
    base = h.with_shrinkage(**grid.fixed)
    rows = []
    for g, value in enumerate(grid.values):
        hg = base.with_shrinkage(**{grid.parameter: value})
        try:
            scores = _score(data, hg, cfg, grid.chains, g * grid.chains)
        except HSPError as exc:
            raise GridPointError(grid.parameter, value, exc) from exc
        rows.append(SensitivityRow(value, *scores))
        log.info("%s=%g: subject ARI %.3f, condition ARI %.3f",
                 grid.parameter, value, scores[0], scores[2])
    return rows


def plateau_choice(values, scores, threshold: float = DEFAULT_PLATEAU) -> float:
    """First grid value after which the score gains less than ``threshold``.

    Falls back to the last value when the score keeps climbing.
    """
    if len(values) != len(scores) or not values:
        raise InvalidArgumentError("need one score per grid value")
    for k in range(len(values) - 1):
        if scores[k + 1] - scores[k] < threshold:
            return values[k]
    return values[-1]


@dataclass
class Selection:
    lam: float
    rho: float
    tau: float
    tables: dict


def heuristic_select(data: DataMatrix, h: Hyperparams, grids, cfg: SamplerConfig,
                     rng: np.random.Generator, rho: float | None = None,
                     threshold: float = DEFAULT_PLATEAU) -> Selection:
    """Choose lambda, then rho, then tau by sequential grid sweeps.

    ``grids`` maps (or lists) one GridSpec per parameter.  Lambda and rho
    are chosen on the mean condition ARI, tau on the subject ARI.  The
    starting rho is ``rho`` if given, otherwise a uniform draw from its grid.
    """
    if not isinstance(grids, dict):
        grids = {g.parameter: g for g in grids}
    grids = {_ALIASES.get(k, k): g for k, g in grids.items()}
    missing = [p for p in PARAMETERS if p not in grids]
    if missing:
        raise InvalidArgumentError(f"missing grids for {', '.join(missing)}")

    rho0 = float(rho) if rho is not None else float(rng.choice(grids["rho"].values))
    tables = {}

    g = replace(grids["lam"], fixed={"tau": 0.0, "rho": rho0})
    tables["lam"] = grid_sensitivity(data, h, g, cfg)
    lam = plateau_choice(g.values, [r.condition_ari for r in tables["lam"]], threshold)

    g = replace(grids["rho"], fixed={"tau": 0.0, "lam": lam})
    tables["rho"] = grid_sensitivity(data, h, g, cfg)
    rho_sel = plateau_choice(g.values, [r.condition_ari for r in tables["rho"]], threshold)

    g = replace(grids["tau"], fixed={"lam": lam, "rho": rho_sel})
    tables["tau"] = grid_sensitivity(data, h, g, cfg)
    tau = plateau_choice(g.values, [r.subject_ari for r in tables["tau"]], threshold)
    return Selection(lam, rho_sel, tau, tables)
