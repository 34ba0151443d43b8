"""MCMC for the HSP model.

Each iteration runs, in order: cluster parameters, condition partitions,
condition permutations, subject partition, subject permutation, group base
partitions, group base permutations.  The per-step functions below operate
on an :class:`HspState` in place and are mainly useful for testing; the
production loop is :func:`run_chain`.
"""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field

import numpy as np

from . import _kernels as K
from .errors import ConsistencyError, InvalidArgumentError
from .model import DataMatrix, HspState, Hyperparams, PreparedHyper, update_theta
from .partition import Partition

log = logging.getLogger(__name__)


@dataclass
class SamplerConfig:
    iterations: int = 10000
    burn_in: int = 2000
    thin: int = 1
    seed: int = 0
    prior_only: bool = False
    record_nu_star: bool = False
    # 0 proposes a fresh uniform permutation; k > 0 reshuffles k random positions
    shuffle_size: int = 0

    def __post_init__(self):
        if self.iterations < 1 or self.burn_in < 0 or self.burn_in >= self.iterations:
            raise InvalidArgumentError(
                f"need 0 <= burn_in < iterations, got {self.burn_in} and {self.iterations}"
            )
        if self.thin < 1:
            raise InvalidArgumentError("thin must be at least 1")
        if self.shuffle_size < 0:
            raise InvalidArgumentError("shuffle_size must be non-negative")

    @property
    def kept_count(self) -> int:
        return (self.iterations - self.burn_in) // self.thin


@dataclass
class PartitionTrace:
    """Kept draws of the subject partition and every condition partition.

    ``subject`` is (T, J) and ``condition`` is (T, J, I), both holding 1-based
    canonical labels.  ``base`` optionally holds, per kept draw, a (K, I)
    array of group base partitions.
    """

    iterations: np.ndarray
    subject: np.ndarray
    condition: np.ndarray
    base: list | None = None
    acceptance: dict = field(default_factory=dict)
    wall_time: float = 0.0

    @property
    def kept_count(self) -> int:
        return len(self.iterations)

    @property
    def n_subjects(self) -> int:
        return self.subject.shape[1]

    @property
    def n_conditions(self) -> int:
        return self.condition.shape[2]

    @property
    def subject_partitions(self) -> list[Partition]:
        return [Partition(tuple(row)) for row in self.subject]

    def condition_partitions(self, j: int) -> list[Partition]:
        return [Partition(tuple(row)) for row in self.condition[:, j, :]]

    def __eq__(self, other):
        if not isinstance(other, PartitionTrace):
            return NotImplemented
        same = (
            np.array_equal(self.iterations, other.iterations)
            and np.array_equal(self.subject, other.subject)
            and np.array_equal(self.condition, other.condition)
        )
        if self.base is None or other.base is None:
            return same and self.base is other.base
        return same and len(self.base) == len(other.base) and all(
            np.array_equal(a, b) for a, b in zip(self.base, other.base)
        )


def chain_seed(seed: int, *counters: int) -> int:
    """32-bit kernel seed for the stream identified by ``(seed, *counters)``."""
    ss = np.random.SeedSequence(int(seed), spawn_key=tuple(int(c) for c in counters))
    return int(ss.generate_state(1, np.uint32)[0])


def _reseed(rng):
    if rng is not None:
        K.seed(int(rng.integers(0, 2**32 - 1)))


def _empty_state(I, J) -> HspState:
    z = lambda *shape: np.zeros(shape, np.int64)  # noqa: E731
    return HspState(
        c=z(J), n_groups=0, zeta=z(J), nu_star=z(J, I), eps_star=z(J, I),
        pi=z(J, I), n_clusters=z(J), delta=z(J, I),
        mu=np.zeros((J, I)), sigma2=np.ones((J, I)),
    )


def init_state(h: Hyperparams, rng: np.random.Generator | None = None,
               prepared: PreparedHyper | None = None) -> HspState:
    """Draw an initial state from the HSP prior."""
    _reseed(rng)
    p = prepared or PreparedHyper.build(h)
    s = _empty_state(h.n_conditions, h.n_subjects)
    kk = np.zeros(1, np.int64)
    K.init_from_prior(
        s.c, kk, s.zeta, s.nu_star, s.eps_star, s.pi, s.n_clusters, s.delta, s.mu, s.sigma2,
        p.c0, p.nu0, p.tau, p.rho, p.lam, p.ttab, p.rtab, p.ltab, p.alpha0, p.beta0, p.beta,
        p.a0, p.b0, p.d0, p.e0, *p.workspace,
    )
    s.n_groups = int(kk[0])
    return s


def _data_values(data, state, prior_only):
    J, I = state.pi.shape
    if data is None:
        if not prior_only:
            raise InvalidArgumentError("data are required unless prior_only is set")
        return np.zeros((I, J))
    if data.values.shape != (I, J):
        raise InvalidArgumentError(
            f"data are {data.values.shape}, state expects {I} conditions x {J} subjects"
        )
    return data.values


def step_condition_partitions(state: HspState, data: DataMatrix | None, h: Hyperparams,
                              rng=None, prior_only: bool = False, prepared=None) -> None:
    """Gibbs update of every condition label, new clusters drawing theta from the prior."""
    _reseed(rng)
    p = prepared or PreparedHyper.build(h)
    y = _data_values(data, state, prior_only)
    K.step_pi(y, state.c, state.nu_star, state.pi, state.n_clusters, state.delta,
              state.mu, state.sigma2, p.lam, p.ltab, p.beta, p.a0, p.b0, p.d0, p.e0,
              prior_only or data is None, *p.workspace)


def step_condition_permutations(state: HspState, h: Hyperparams, rng=None,
                                shuffle_size: int = 0, prepared=None) -> int:
    """Metropolis-Hastings update of each subject's visit order. Returns acceptances."""
    _reseed(rng)
    p = prepared or PreparedHyper.build(h)
    return int(K.step_delta(state.c, state.nu_star, state.pi, state.delta, p.lam, p.ltab,
                            p.beta, shuffle_size, h.lam == 0, *p.workspace))


def step_subject_partition(state: HspState, data: DataMatrix | None, h: Hyperparams,
                           rng=None, prepared=None) -> None:
    """Gibbs update of every subject label.

    The data enter only through the condition partitions, so ``data`` is
    accepted for interface symmetry and not read.
    """
    _reseed(rng)
    p = prepared or PreparedHyper.build(h)
    kk = np.array([state.n_groups], np.int64)
    K.step_c(state.c, kk, state.zeta, p.c0, p.tau, p.ttab, p.alpha0, state.nu_star,
             state.eps_star, p.nu0, p.rho, p.rtab, p.beta0, state.pi, state.delta,
             p.lam, p.ltab, p.beta, *p.workspace)
    state.n_groups = int(kk[0])


def step_subject_permutation(state: HspState, h: Hyperparams, rng=None,
                             shuffle_size: int = 0, prepared=None) -> int:
    _reseed(rng)
    p = prepared or PreparedHyper.build(h)
    return int(K.mh_permutation(state.c, p.c0, state.zeta, p.tau, p.ttab, p.alpha0,
                                shuffle_size, h.tau == 0, *p.workspace))


def step_base_partitions(state: HspState, h: Hyperparams, rng=None, prepared=None) -> None:
    _reseed(rng)
    p = prepared or PreparedHyper.build(h)
    kk = np.array([state.n_groups], np.int64)
    K.step_nu(state.c, kk, state.nu_star, state.eps_star, p.nu0, p.rho, p.rtab, p.beta0,
              state.pi, state.n_clusters, state.delta, p.lam, p.ltab, p.beta, *p.workspace)


def step_base_permutations(state: HspState, h: Hyperparams, rng=None,
                           shuffle_size: int = 0, prepared=None) -> int:
    _reseed(rng)
    p = prepared or PreparedHyper.build(h)
    kk = np.array([state.n_groups], np.int64)
    return int(K.step_eps(kk, state.nu_star, state.eps_star, p.nu0, p.rho, p.rtab, p.beta0,
                          shuffle_size, h.rho == 0, *p.workspace))


def sweep(state: HspState, data: DataMatrix | None, h: Hyperparams, rng=None,
          prior_only: bool = False, shuffle_size: int = 0, prepared=None) -> None:
    """All seven updates once, in order. Acceptance counts accumulate in ``state.accept``."""
    _reseed(rng)
    p = prepared or PreparedHyper.build(h)
    y = _data_values(data, state, prior_only)
    kk = np.array([state.n_groups], np.int64)
    ok = K.sweep(
        y, state.c, kk, state.zeta, state.nu_star, state.eps_star, state.pi,
        state.n_clusters, state.delta, state.mu, state.sigma2,
        p.c0, p.nu0, p.tau, p.rho, p.lam, p.ttab, p.rtab, p.ltab, p.alpha0, p.beta0, p.beta,
        p.a0, p.b0, p.d0, p.e0, prior_only or data is None, shuffle_size,
        h.tau == 0, h.rho == 0, h.lam == 0, state.accept, *p.workspace,
    )
    state.n_groups = int(kk[0])
    if not ok:
        raise ConsistencyError("empty condition cluster encountered during theta update")


def _acceptance(accept):
    names = ("condition_permutation", "subject_permutation", "base_permutation")
    return {
        name: (float(accept[i] / accept[i + 3]) if accept[i + 3] else None)
        for i, name in enumerate(names)
    }


def run_chain(data: DataMatrix | None, h: Hyperparams, cfg: SamplerConfig,
              chain: int = 0, progress=None) -> PartitionTrace:
    """Run one chain and return the kept partition draws.

    The chain's random stream is derived from ``(cfg.seed, chain)``, so a
    fixed seed, config and data reproduce the trace exactly.
    """
    I, J = h.n_conditions, h.n_subjects
    if data is not None:
        if data.values.shape != (I, J):
            raise InvalidArgumentError(
                f"data are {data.values.shape} but hyperparameters describe {I} x {J}"
            )
        if not data.standardized and not cfg.prior_only:
            log.warning("data are not standardized; the default priors assume they are")
    elif not cfg.prior_only:
        raise InvalidArgumentError("data are required unless prior_only is set")

    started = time.perf_counter()
    K.seed(chain_seed(cfg.seed, chain))
    p = PreparedHyper.build(h)
    state = init_state(h, prepared=p)
    prior_only = cfg.prior_only or data is None
    y = np.zeros((I, J)) if data is None else data.values

    T = cfg.kept_count
    dtype = np.int16 if max(I, J) < 2**15 else np.int32
    iters = np.empty(T, np.int64)
    subj = np.empty((T, J), dtype)
    cond = np.empty((T, J, I), dtype)
    base = [] if cfg.record_nu_star else None
    kk = np.array([state.n_groups], np.int64)
    args_tail = (
        p.c0, p.nu0, p.tau, p.rho, p.lam, p.ttab, p.rtab, p.ltab, p.alpha0, p.beta0, p.beta,
        p.a0, p.b0, p.d0, p.e0, prior_only, cfg.shuffle_size,
        h.tau == 0, h.rho == 0, h.lam == 0, state.accept, *p.workspace,
    )
    t = 0
    for it in range(1, cfg.iterations + 1):
        ok = K.sweep(y, state.c, kk, state.zeta, state.nu_star, state.eps_star, state.pi,
                     state.n_clusters, state.delta, state.mu, state.sigma2, *args_tail)
        if not ok:
            raise ConsistencyError(f"empty condition cluster at iteration {it}")
        if it > cfg.burn_in and (it - cfg.burn_in) % cfg.thin == 0:
            iters[t] = it
            subj[t] = state.c + 1
            cond[t] = state.pi + 1
            if base is not None:
                base.append((state.nu_star[: kk[0]] + 1).astype(dtype))
            t += 1
        if progress is not None:
            progress(it)
    state.n_groups = int(kk[0])
    return PartitionTrace(iters, subj, cond, base, _acceptance(state.accept),
                          wall_time=time.perf_counter() - started)
